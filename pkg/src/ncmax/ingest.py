"""From matrices and step functions to spectral profiles; seeded generators."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .rearrange import SpectralProfile, StepFunction

MAX_SWEEPS = 60


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    rows: int
    cols: int
    entries: np.ndarray  # row-major, length rows * cols

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float).ravel()
        if self.rows < 1 or self.cols < 1 or e.size != self.rows * self.cols:
            raise ValueError("matrix needs rows * cols entries")
        if not np.all(np.isfinite(e)):
            raise ValueError("matrix entries must be finite")
        object.__setattr__(self, "entries", e)

    @classmethod
    def from_array(cls, a) -> "DenseMatrix":
        a = np.asarray(a, dtype=float)
        if a.ndim != 2:
            raise ValueError("expected a 2-d array")
        return cls(a.shape[0], a.shape[1], a.ravel())

    def to_array(self) -> np.ndarray:
        return self.entries.reshape(self.rows, self.cols).copy()

    def __add__(self, other: "DenseMatrix") -> "DenseMatrix":
        return DenseMatrix.from_array(self.to_array() + other.to_array())

    def to_json(self) -> str:
        return json.dumps({"rows": self.rows, "cols": self.cols,
                           "entries": [float(x) for x in self.entries]})

    @classmethod
    def from_json(cls, text: str) -> "DenseMatrix":
        d = json.loads(text)
        try:
            return cls(int(d["rows"]), int(d["cols"]), np.array(d["entries"], dtype=float))
        except KeyError as exc:
            raise ValueError(f"matrix JSON is missing {exc}") from exc

    def to_csv(self) -> str:
        a = self.to_array()
        return "".join(",".join(f"{x:.17g}" for x in row) + "\n" for row in a)

    @classmethod
    def from_csv(cls, text: str) -> "DenseMatrix":
        rows = [[float(x) for x in r] for r in csv.reader(io.StringIO(text)) if r]
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError("matrix CSV rows must be nonempty and equally long")
        return cls.from_array(rows)


def jacobi_singular_values(a: np.ndarray, tol: float = 1e-12,
                           max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    """Singular values by one-sided (Hestenes) Jacobi rotations.

    Columns are rotated pairwise until every pair is orthogonal to
    relative ``tol``; the column norms are then the singular values.
    """
    u = np.array(a, dtype=float)
    if u.shape[1] > u.shape[0]:
        u = u.T.copy()
    n = u.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                ci, cj = u[:, i], u[:, j]
                alpha = float(ci @ ci)
                beta = float(cj @ cj)
                gamma = float(ci @ cj)
                if abs(gamma) <= tol * math.sqrt(alpha * beta) or gamma == 0.0:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                new_i = c * ci - s * cj
                new_j = s * ci + c * cj
                u[:, i] = new_i
                u[:, j] = new_j
        if not rotated:
            return np.sort(np.linalg.norm(u, axis=0))[::-1]
    raise ConvergenceError(f"Jacobi SVD did not converge in {max_sweeps} sweeps")


def profile_from_matrix(m: DenseMatrix, tol: float = 1e-12) -> SpectralProfile:
    """Singular values with unit trace weight; those below ``tol * max`` are dropped."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    sv = jacobi_singular_values(m.to_array(), tol=tol)
    if len(sv) == 0 or sv[0] == 0:
        return SpectralProfile.empty()
    keep = sv[sv > tol * sv[0]]
    return SpectralProfile.from_atoms((s, 1.0) for s in keep)


def profile_from_stepfn(f: StepFunction) -> SpectralProfile:
    """Level sets of ``|f|`` with their lengths as trace weights."""
    lengths = np.diff(f.breakpoints)
    atoms = [(abs(v), w) for v, w in zip(f.values, lengths) if v != 0]
    return SpectralProfile.from_atoms(atoms)


@dataclass(frozen=True)
class GeneratorSpec:
    seed: int = 42
    min_size: int = 1
    max_size: int = 64
    value_bounds: tuple[float, float] = (1e-3, 1e3)
    weight_bounds: tuple[float, float] = (1e-2, 1e2)

    def rng(self, index: int, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed & 0xFFFFFFFFFFFFFFFF, stream, index])


def _log_uniform(rng: np.random.Generator, bounds, size) -> np.ndarray:
    lo, hi = bounds
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size))


def random_profile(g: GeneratorSpec, index: int) -> SpectralProfile:
    rng = g.rng(index)
    n = int(rng.integers(g.min_size, g.max_size + 1))
    values = _log_uniform(rng, g.value_bounds, n)
    weights = _log_uniform(rng, g.weight_bounds, n)
    return SpectralProfile.from_atoms(zip(values, weights))


def random_matrix(g: GeneratorSpec, index: int, n: int = 8, symmetric: bool = False,
                  stream: int = 1) -> DenseMatrix:
    rng = g.rng(index, stream)
    a = rng.standard_normal((n, n))
    if symmetric:
        a = (a + a.T) / 2
    return DenseMatrix.from_array(a)


def load_any(text: str, name: str = "") -> SpectralProfile:
    """Profile JSON, matrix JSON/CSV or step-function CSV, sniffed from content."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        data = json.loads(text)
        if "atoms" in data:
            return SpectralProfile.from_dict(data)
        if "entries" in data:
            return profile_from_matrix(DenseMatrix.from_json(text))
        raise ValueError(f"{name or 'input'}: JSON is neither a profile nor a matrix")
    first = stripped.splitlines()[0].replace(" ", "") if stripped else ""
    if first == "t,v":
        return profile_from_stepfn(StepFunction.from_csv(text))
    return profile_from_matrix(DenseMatrix.from_csv(text))
