import numpy as np
import pytest

from lsiep.manifold import ManifoldPoint, TangentVector
from lsiep.model import ProblemData, sym_part


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_problem(rng, n, l, m, normalized=False):
    basis = [sym_part(rng.standard_normal((n, n))) for _ in range(l + 1)]
    if normalized:
        basis = [a / np.linalg.norm(a) for a in basis]
        targets = np.sort(rng.uniform(0.0, 1.0, m))
    else:
        targets = np.sort(rng.standard_normal(m))
    return ProblemData(np.array(basis), targets)


def random_point(rng, p, normalized=False):
    lam = rng.uniform(0.0, 1.0, p.n - p.m) if normalized else rng.standard_normal(p.n - p.m)
    return ManifoldPoint(c=rng.standard_normal(p.l),
                         Q=random_orthogonal(rng, p.n),
                         lam=lam)


def random_tangent(rng, p):
    n = p.n
    return TangentVector(dc=rng.standard_normal(p.l),
                         omega_packed=rng.standard_normal(n * (n - 1) // 2),
                         dlambda=rng.standard_normal(n - p.m))


def exact_solution_instance(rng, n, l, m):
    """Instance built so that x0 solves it exactly: A_0 is spectrally
    consistent with the targets and c = 0."""
    q = random_orthogonal(rng, n)
    lam_free = rng.standard_normal(n - m)
    targets = np.sort(rng.standard_normal(m))
    a0 = (q * np.concatenate([targets, lam_free])) @ q.T
    basis = [a0] + [sym_part(rng.standard_normal((n, n))) for _ in range(l)]
    p = ProblemData(np.array(basis), targets)
    x = ManifoldPoint(c=np.zeros(l), Q=q, lam=lam_free)
    return p, x


def loglog_slope(t_values, errors):
    t_values = np.asarray(t_values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = errors > 0
    coeffs = np.polyfit(np.log(t_values[keep]), np.log(errors[keep]), 1)
    return coeffs[0]
