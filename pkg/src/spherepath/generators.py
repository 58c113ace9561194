"""Synthetic samples for power and size studies, plus covariance diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .augment import RngStream
from .errors import DataError, InvalidDimensionError
from .model import GeneratorSpec, ObservationMatrix


def _gen(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return RngStream(int(rng)).generator()


def _check_shape(n, d):
    if int(n) < 1:
        raise DataError(f"n must be >= 1, got {n}")
    if int(d) < 1:
        raise InvalidDimensionError(f"d must be >= 1, got {d}")


def _check_equicorr(a, b, d):
    if not a > 0:
        raise DataError(f"equicorrelation needs a > 0, got {a}")
    if a + d * b < 0:
        raise DataError(f"a + d*b = {a + d * b} < 0: covariance is not positive semidefinite")


def equicorr_sqrt(a: float, b: float, d: int) -> tuple[float, float]:
    """``(alpha, beta)`` with ``(alpha I + beta J)**2 = a I + b J`` in dimension ``d``."""
    _check_equicorr(a, b, d)
    alpha = math.sqrt(a)
    beta = (math.sqrt(a + d * b) - alpha) / d
    return alpha, beta


def _apply_equicorr_sqrt(z, a, b):
    d = z.shape[1]
    alpha, beta = equicorr_sqrt(a, b, d)
    # (alpha I + beta J) z for each row, in O(nd)
    return alpha * z + beta * z.sum(axis=1, keepdims=True)


def gen_equicorr_normal(n, d, a, b, rng, mean=None) -> ObservationMatrix:
    """``N(mean, aI + bJ)`` rows via the closed-form matrix square root."""
    _check_shape(n, d)
    _check_equicorr(a, b, d)
    z = _gen(rng).standard_normal((int(n), int(d)))
    x = _apply_equicorr_sqrt(z, a, b)
    if mean is not None:
        x = x + np.broadcast_to(np.asarray(mean, dtype=float), (int(d),))
    return ObservationMatrix(x)


@dataclass(frozen=True)
class DiagRecipe:
    """Variance profile for :func:`gen_diag_normal`.

    ``kind`` is ``"spike"`` (first variance ``d**gamma``, rest 1),
    ``"half_half"`` (first ``d // 2`` variances ``v1``, rest ``v2``) or
    ``"custom"`` (explicit ``values``).
    """

    kind: str
    gamma: float = 1.0
    v1: float = 1.0
    v2: float = 2.0
    values: tuple = ()

    def variances(self, d: int) -> np.ndarray:
        d = int(d)
        if self.kind == "spike":
            out = np.ones(d)
            out[0] = float(d) ** self.gamma
        elif self.kind == "half_half":
            out = np.full(d, float(self.v2))
            out[: d // 2] = self.v1
        elif self.kind == "custom":
            out = np.asarray(self.values, dtype=float)
            if out.shape != (d,):
                raise InvalidDimensionError(f"custom diagonal has {out.size} entries, d = {d}")
        else:
            raise ValueError(f"unknown diagonal recipe {self.kind!r}")
        if np.any(out <= 0):
            raise DataError("variances must be positive")
        return out


def spike(gamma: float) -> DiagRecipe:
    return DiagRecipe("spike", gamma=float(gamma))


def half_half(v1: float, v2: float) -> DiagRecipe:
    return DiagRecipe("half_half", v1=float(v1), v2=float(v2))


def custom(diag) -> DiagRecipe:
    return DiagRecipe("custom", values=tuple(float(v) for v in diag))


def gen_diag_normal(n, d, recipe: DiagRecipe, rng) -> ObservationMatrix:
    _check_shape(n, d)
    sd = np.sqrt(recipe.variances(d))
    z = _gen(rng).standard_normal((int(n), int(d)))
    return ObservationMatrix(z * sd)


def gen_elliptic_cauchy(n, d, a, b, rng) -> ObservationMatrix:
    """Multivariate Cauchy (``t`` with one degree of freedom): ``sqrt(S) Z / |W|``."""
    _check_shape(n, d)
    _check_equicorr(a, b, d)
    g = _gen(rng)
    z = g.standard_normal((int(n), int(d)))
    w = np.abs(g.standard_normal(int(n)))
    return ObservationMatrix(_apply_equicorr_sqrt(z, a, b) / w[:, None])


def gen_hypercube_uniform(n, d, rng) -> ObservationMatrix:
    _check_shape(n, d)
    return ObservationMatrix(_gen(rng).uniform(-1.0, 1.0, size=(int(n), int(d))))


def gen_iid_laplace(n, d, rng) -> ObservationMatrix:
    """Standard Laplace entries by inverting the CDF."""
    _check_shape(n, d)
    u = _gen(rng).uniform(-0.5, 0.5, size=(int(n), int(d)))
    return ObservationMatrix(-np.sign(u) * np.log1p(-2.0 * np.abs(u)))


def gen_angular2d(n, rng) -> ObservationMatrix:
    """``R U`` on the plane: radius ``U[1, 5]`` in the first and third quadrants, 1 elsewhere."""
    _check_shape(n, 2)
    g = _gen(rng)
    theta = g.uniform(0.0, 2.0 * math.pi, size=int(n))
    u = np.column_stack([np.cos(theta), np.sin(theta)])
    r1 = g.uniform(1.0, 5.0, size=int(n))
    r = np.where(u[:, 0] * u[:, 1] > 0, r1, 1.0)
    return ObservationMatrix(r[:, None] * u)


def gen_spherical_null(n, d, rng, family: str = "normal", nu: float | None = None) -> ObservationMatrix:
    """Standard normal rows, or multivariate ``t(nu)`` rows ``Z * sqrt(nu / chi2_nu)``."""
    _check_shape(n, d)
    g = _gen(rng)
    z = g.standard_normal((int(n), int(d)))
    if family == "normal":
        return ObservationMatrix(z)
    if family == "t":
        if nu is None or not nu > 0:
            raise DataError(f"t family needs nu > 0, got {nu}")
        chi2 = g.chisquare(float(nu), size=int(n))
        return ObservationMatrix(z * np.sqrt(nu / chi2)[:, None])
    raise ValueError(f"unknown spherical family {family!r}")


# -- example registry ------------------------------------------------------

EXAMPLES = {
    "3.1": GeneratorSpec("equicorr_normal", (("a", 0.4), ("b", 0.6))),
    "3.2": GeneratorSpec("diag_normal", (("recipe", "half_half"), ("v1", 1.0), ("v2", 2.0))),
    "3.3": GeneratorSpec("diag_normal", (("recipe", "spike"), ("gamma", 1.0))),
    "4.1": GeneratorSpec("hypercube_uniform"),
    "4.2": GeneratorSpec("iid_laplace"),
    "5.1": GeneratorSpec("equicorr_normal", (("a", 0.4), ("b", 0.6))),
    "5.2": GeneratorSpec("elliptic_cauchy", (("a", 0.4), ("b", 0.6))),
    "5.3": GeneratorSpec("diag_normal", (("recipe", "spike"), ("gamma", 0.3))),
    "5.4": GeneratorSpec("diag_normal", (("recipe", "half_half"), ("v1", 1.0), ("v2", 2.0))),
    "5.5": GeneratorSpec("hypercube_uniform"),
    "5.6": GeneratorSpec("iid_laplace"),
    "6.1": GeneratorSpec("equicorr_normal", (("a", 1.0), ("b", 0.0), ("mean", 1.0))),
    "6.2": GeneratorSpec("equicorr_normal", (("a", 0.7), ("b", 0.3), ("mean", 1.0))),
    "null-normal": GeneratorSpec("spherical_normal"),
    "null-t": GeneratorSpec("spherical_t", (("nu", 1.0),)),
    "angular2d": GeneratorSpec("angular2d"),
}


def example(name: str) -> GeneratorSpec:
    try:
        return EXAMPLES[str(name)]
    except KeyError:
        raise ValueError(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}") from None


def _recipe(spec: GeneratorSpec) -> DiagRecipe:
    kind = spec.get("recipe")
    if kind == "spike":
        return spike(spec.get("gamma", 1.0))
    if kind == "half_half":
        return half_half(spec.get("v1", 1.0), spec.get("v2", 2.0))
    if kind == "custom":
        return custom(spec.get("values"))
    raise ValueError(f"unknown diagonal recipe {kind!r}")


def generate(spec: GeneratorSpec, n: int, d: int, rng) -> ObservationMatrix:
    """Draw an ``n x d`` sample from ``spec``."""
    fam = spec.family
    if fam == "equicorr_normal":
        return gen_equicorr_normal(n, d, spec.get("a"), spec.get("b"), rng, mean=spec.get("mean"))
    if fam == "diag_normal":
        return gen_diag_normal(n, d, _recipe(spec), rng)
    if fam == "elliptic_cauchy":
        return gen_elliptic_cauchy(n, d, spec.get("a"), spec.get("b"), rng)
    if fam == "hypercube_uniform":
        return gen_hypercube_uniform(n, d, rng)
    if fam == "iid_laplace":
        return gen_iid_laplace(n, d, rng)
    if fam == "angular2d":
        if int(d) != 2:
            raise InvalidDimensionError("the angular generator is two-dimensional")
        return gen_angular2d(n, rng)
    if fam == "spherical_normal":
        return gen_spherical_null(n, d, rng, "normal")
    if fam == "spherical_t":
        return gen_spherical_null(n, d, rng, "t", spec.get("nu", 1.0))
    raise ValueError(f"unknown generator family {fam!r}")


# -- covariance descriptors ------------------------------------------------


def covariance_diagonal(spec: GeneratorSpec, d: int) -> np.ndarray:
    """Diagonal of the scatter matrix induced by ``spec``."""
    return np.diag(covariance_matrix(spec, d)).copy()


def covariance_matrix(spec: GeneratorSpec, d: int) -> np.ndarray:
    """Scatter matrix of ``spec`` in dimension ``d`` (covariance where it exists)."""
    d = int(d)
    fam = spec.family
    if fam in ("equicorr_normal", "elliptic_cauchy"):
        a, b = spec.get("a"), spec.get("b")
        _check_equicorr(a, b, d)
        return a * np.eye(d) + b * np.ones((d, d))
    if fam == "diag_normal":
        return np.diag(_recipe(spec).variances(d))
    if fam == "hypercube_uniform":
        return np.eye(d) / 3.0
    if fam == "iid_laplace":
        return 2.0 * np.eye(d)
    if fam in ("spherical_normal", "spherical_t"):
        return np.eye(d)
    raise ValueError(f"no covariance descriptor for {fam!r}")


def covariance_eigenvalues(spec: GeneratorSpec, d: int) -> np.ndarray:
    d = int(d)
    if spec.family in ("equicorr_normal", "elliptic_cauchy"):
        a, b = spec.get("a"), spec.get("b")
        _check_equicorr(a, b, d)
        eig = np.full(d, float(a))
        eig[0] = a + d * b
        return np.sort(eig)[::-1]
    if spec.family == "diag_normal":
        return np.sort(_recipe(spec).variances(d))[::-1]
    return np.sort(np.linalg.eigvalsh(covariance_matrix(spec, d)))[::-1]


def eps_sphericity(eigs) -> float:
    """``sum(l**2) / sum(l)**2`` for a nonnegative spectrum."""
    lam = np.asarray(eigs, dtype=float).ravel()
    if lam.size == 0 or np.any(lam < 0):
        raise DataError("eigenvalues must be nonnegative")
    total = lam.sum()
    if total == 0:
        raise DataError("all eigenvalues are zero")
    return float((lam**2).sum() / total**2)


def diag_signal(diag, alpha_exp: float) -> float:
    """``Tr(D^2) / d**a - Tr(D)**2 / d**(1 + a)``; positive iff the variances differ."""
    v = np.asarray(diag, dtype=float).ravel()
    if np.any(v < 0):
        raise DataError("variances must be nonnegative")
    d = v.size
    return float((v**2).sum() / d**alpha_exp - v.sum() ** 2 / d ** (1.0 + alpha_exp))
