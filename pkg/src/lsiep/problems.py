"""Generators for the three experiment families and the starting-point recipe.

Kinds:

* ``example1``: the fixed 5x5 instance with tridiagonal A_0, rank-one basis
  matrices 4 e_k e_k^T and prescribed spectrum {1, 1, 2, 3, 4}.
* ``sturm_liouville``: Rayleigh-Ritz discretization of the inverse
  Sturm-Liouville problem with an even cosine potential; the full spectrum
  of A(c_hat) is prescribed (m = n) and c_hat decays like 1/k^4.
* ``random``: seeded dense symmetric instances prescribing the m smallest
  eigenvalues of A(c_hat).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .manifold import ManifoldPoint
from .model import ProblemData, assemble_matrix, sym_part

__all__ = [
    "InstanceSpec",
    "GeneratedInstance",
    "initial_point",
    "make_example1",
    "make_sturm_liouville",
    "make_random",
    "build_instance",
    "truncate_decimals",
]

KINDS = ("example1", "sturm_liouville", "random")

EXAMPLE1_C0 = np.array([0.6316, 0.2378, 0.9092, 0.9866, 0.5007])


@dataclass
class InstanceSpec:
    kind: str
    n: Optional[int] = None
    l: Optional[int] = None
    m: Optional[int] = None
    seed: int = 0
    chop_decimals: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown instance kind {self.kind!r}; choose from {KINDS}")
        if self.kind == "example1":
            for name, value in (("n", self.n), ("l", self.l), ("m", self.m)):
                if value is not None and value != 5:
                    raise ValueError(f"example1 fixes {name}=5")
            self.n = self.l = self.m = 5
        elif self.kind == "sturm_liouville":
            if self.n is None or self.l is None:
                raise ValueError("sturm_liouville needs n and l")
            if self.m is not None and self.m != self.n:
                raise ValueError("sturm_liouville prescribes the full spectrum (m = n)")
            self.m = self.n
        else:
            if self.n is None or self.l is None or self.m is None:
                raise ValueError("random instances need n, l and m")
            if self.m > self.n:
                raise ValueError("m cannot exceed n")


@dataclass
class GeneratedInstance:
    problem: ProblemData
    x0: ManifoldPoint = field(repr=False)
    c_true: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        doc = self.problem.to_dict()
        doc["x0"] = {
            "c": self.x0.c.tolist(),
            "Q": self.x0.Q.reshape(-1).tolist(),
            "lam": self.x0.lam.tolist(),
        }
        if self.c_true is not None:
            doc["c_true"] = self.c_true.tolist()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "GeneratedInstance":
        problem = ProblemData.from_dict(doc)
        n = problem.n
        block = doc["x0"]
        x0 = ManifoldPoint(
            c=np.asarray(block["c"], dtype=float),
            Q=np.asarray(block["Q"], dtype=float).reshape(n, n),
            lam=np.asarray(block["lam"], dtype=float),
        )
        c_true = doc.get("c_true")
        return cls(problem, x0, None if c_true is None else np.asarray(c_true, dtype=float))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path: str | Path) -> "GeneratedInstance":
        return cls.from_dict(json.loads(Path(path).read_text()))


def initial_point(p: ProblemData, c0: np.ndarray) -> ManifoldPoint:
    """Starting point from the symmetric eigendecomposition of A(c0):
    Q0 holds the eigenvectors (eigenvalues ascending) and the free diagonal
    block takes the trailing n - m eigenvalues."""
    c0 = np.asarray(c0, dtype=float)
    eigvals, eigvecs = np.linalg.eigh(assemble_matrix(p, c0))
    return ManifoldPoint(c=c0, Q=eigvecs, lam=eigvals[p.m:].copy())


def make_example1() -> GeneratedInstance:
    """Fixed 5x5 instance; the least-squares optimum has a nonzero residual,
    so there is no ground-truth coefficient vector."""
    n = 5
    a0 = np.zeros((n, n))
    for i in range(n - 1):
        a0[i, i + 1] = a0[i + 1, i] = -1.0
    basis = [a0]
    eye = np.eye(n)
    for k in range(n):
        basis.append(4.0 * np.outer(eye[k], eye[k]))
    problem = ProblemData(np.array(basis), np.array([1.0, 1.0, 2.0, 3.0, 4.0]))
    return GeneratedInstance(problem, initial_point(problem, EXAMPLE1_C0))


def _antidiagonal(n: int, k: int) -> np.ndarray:
    """n x n 0/1 matrix with ones where i + j = k - 1 (0-based), i.e. the
    Hankel matrix with first column e_k (k <= n) or last row e_{k-n+1}."""
    e = np.eye(n)
    if k <= n:
        return sla.hankel(e[k - 1], np.zeros(n))
    return sla.hankel(np.zeros(n), e[k - n])


def make_sturm_liouville(n: int, l: int) -> GeneratedInstance:
    """Rayleigh-Ritz instance: A_0 = diag(1, 4, ..., n^2) and each A_k adds
    ones on the 2k-th sub/super-diagonals minus the (2k)-th anti-diagonal,
    matching the closed form i*j*delta_ij + sum_k c_k (delta_{|i-j|,2k} -
    delta_{i+j,2k}).  Targets are the full spectrum of A(c_hat) with
    c_hat_k = (192 / pi^4) / k^4 and the start uses c0 = 0."""
    if n < 2 or l < 1 or l > n:
        raise ValueError("need n >= 2 and 1 <= l <= n")
    e = np.eye(n)
    basis = [np.diag(np.arange(1, n + 1, dtype=float) ** 2)]
    toeplitz_max = min(l, (n - 1) // 2)
    for k in range(1, l + 1):
        a_k = -_antidiagonal(n, 2 * k - 1)
        if k <= toeplitz_max:
            a_k = a_k + sla.toeplitz(e[2 * k])
        basis.append(a_k)
    c_true = 192.0 / np.pi ** 4 / np.arange(1, l + 1, dtype=float) ** 4
    basis = np.array(basis)
    targets = np.linalg.eigvalsh(basis[0] + np.tensordot(c_true, basis[1:], axes=1))
    problem = ProblemData(basis, targets)
    return GeneratedInstance(problem, initial_point(problem, np.zeros(l)), c_true)


def truncate_decimals(values: np.ndarray, decimals: int) -> np.ndarray:
    """Chop towards zero after the given number of decimal places."""
    scale = 10.0 ** decimals
    return np.trunc(np.asarray(values, dtype=float) * scale) / scale


def make_random(n: int, l: int, m: int, seed: int = 0,
                chop_decimals: Optional[int] = None) -> GeneratedInstance:
    """Seeded dense instance: standard-normal c_hat and symmetrized
    standard-normal basis; the m smallest eigenvalues of A(c_hat) are
    prescribed and the start chops c_hat to a few decimals (2 below n=100,
    3 from there on)."""
    if m > n:
        raise ValueError("m cannot exceed n")
    rng = np.random.default_rng(seed)
    c_true = rng.standard_normal(l)
    basis = np.array([sym_part(rng.standard_normal((n, n))) for _ in range(l + 1)])
    spectrum = np.linalg.eigvalsh(basis[0] + np.tensordot(c_true, basis[1:], axes=1))
    problem = ProblemData(basis, np.sort(spectrum)[:m])
    if chop_decimals is None:
        chop_decimals = 2 if n < 100 else 3
    c0 = truncate_decimals(c_true, chop_decimals)
    return GeneratedInstance(problem, initial_point(problem, c0), c_true)


def build_instance(spec: InstanceSpec) -> GeneratedInstance:
    if spec.kind == "example1":
        return make_example1()
    if spec.kind == "sturm_liouville":
        return make_sturm_liouville(spec.n, spec.l)
    return make_random(spec.n, spec.l, spec.m, seed=spec.seed,
                       chop_decimals=spec.chop_decimals)
