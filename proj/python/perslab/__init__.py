"""Persistence probabilities of integrated random walks."""

from fractions import Fraction

from . import _core
from ._core import IncrementSpec, PerslabError, __version__, fit_exponent, estimate_constant, reference_constants

PerslabError.code = property(lambda self: self.args[1] if len(self.args) > 1 else None)


def _frac(s):
    return Fraction(s)


def preset(name):
    return _core.preset(name)


def parse_spec(text):
    return _core.parse_spec(text)


def pmf(spec, k):
    return _frac(spec.pmf(k))


def exact_persistence(spec, n):
    """P(A_1 > 0, ..., A_n > 0) as a Fraction."""
    return _frac(_core.exact_persistence(spec, n))


def exact_persistence_float(spec, n, prune_below=0.0):
    """(value, lower, upper)."""
    return _core.exact_persistence_float(spec, n, prune_below)


def exact_bridge_persistence(spec, n):
    return _frac(_core.exact_bridge_persistence(spec, n))


def enumerate_persistence(spec, n):
    return _frac(_core.enumerate_persistence(spec, n))


def exact_cycle_law(spec, horizon, convention="weak-up"):
    """({(theta, psi): mass}, residual mass beyond the horizon)."""
    atoms, residual = _core.exact_cycle_law(spec, horizon, convention)
    return {k: _frac(v) for k, v in atoms.items()}, _frac(residual)


def symmetry_audit(spec, horizon, convention="weak-up"):
    worst, atom = _core.symmetry_audit(spec, horizon, convention)
    return _frac(worst), atom


def positivity_probs(spec, n_max, weak=False):
    """[P(S_1 > 0), ..., P(S_n > 0)], or >= 0 with weak=True."""
    return [_frac(v) for v in _core.positivity_probs(spec, n_max, weak)]


def sparre_andersen(probs):
    """q_0..q_n from the positivity probabilities P(S_k > 0), k = 1..n."""
    return [_frac(v) for v in _core.sparre_andersen([str(Fraction(p)) for p in probs])]


def symmetric_continuous_qn(n):
    return _frac(_core.symmetric_continuous_qn(n))


def halfplane_measures(bspec, n):
    """Rows (x, lhs1, rhs1, lhs2, rhs2) for a bivariate preset."""
    return [(x, *map(_frac, rest)) for x, *rest in _core.halfplane_measures(bspec, n)]


def mc_persistence(spec, n, samples, seed=20240601, shards=1):
    return _core.mc_persistence(spec, n, samples, seed, shards)


def mc_eta_scaling(spec, n, samples, seed=20240601, shards=1):
    return _core.mc_eta_scaling(spec, n, samples, seed, shards)
