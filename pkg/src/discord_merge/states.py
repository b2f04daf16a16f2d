"""Deterministic generators for the named state families used in tests and sweeps."""

from dataclasses import dataclass, field

import numpy as np

from .core import DensityMatrix, validate_density
from .errors import InvalidParams

# Reproducibility contract for the random families.  Philox is a 64-bit
# counter-based generator; batch item i uses key root_seed + i.
RNG_SPEC = "numpy.random.Philox(4x64-10), per-item key = root_seed + index"

FAMILIES = (
    "bell",
    "bell_diagonal",
    "werner",
    "product",
    "classical_quantum",
    "random_ginibre",
    "random_pure",
    "custom",
)

# Bell basis ordering is fixed as (phi_plus, phi_minus, psi_plus, psi_minus).
_BELL_VECTORS = {
    "phi_plus": np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2),
    "phi_minus": np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2),
    "psi_plus": np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2),
    "psi_minus": np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2),
}
BELL_ORDER = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")


@dataclass(frozen=True)
class StateSpec:
    """Declarative description of a state: family name, parameters, seed."""

    family: str
    params: dict = field(default_factory=dict)
    seed: int | None = None


def rng_for_seed(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed)))


def bell(which: str = "phi_plus") -> DensityMatrix:
    """One of the four maximally entangled two-qubit states."""
    if which not in _BELL_VECTORS:
        raise InvalidParams(f"unknown Bell state {which!r}; choose from {BELL_ORDER}")
    v = _BELL_VECTORS[which]
    return DensityMatrix(np.outer(v, v.conj()), (2, 2))


def bell_diagonal(p) -> DensityMatrix:
    """Mixture of the four Bell projectors with weights p (simplex)."""
    p = np.asarray(p, dtype=float)
    if p.shape != (4,):
        raise InvalidParams(f"need 4 weights, got shape {p.shape}")
    if np.any(p < -1e-12):
        raise InvalidParams(f"weights must be nonnegative, got {p.tolist()}")
    if abs(float(p.sum()) - 1.0) > 1e-9:
        raise InvalidParams(f"weights must sum to 1, got {float(p.sum())}")
    rho = np.zeros((4, 4), dtype=complex)
    for w, name in zip(p, BELL_ORDER):
        v = _BELL_VECTORS[name]
        rho += w * np.outer(v, v.conj())
    return DensityMatrix(rho, (2, 2))


def werner(p: float) -> DensityMatrix:
    """p * phi_plus + (1 - p) * I/4 on two qubits."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise InvalidParams(f"mixing parameter must be in [0, 1], got {p}")
    v = _BELL_VECTORS["phi_plus"]
    rho = p * np.outer(v, v.conj()) + (1.0 - p) * np.eye(4) / 4.0
    return DensityMatrix(rho, (2, 2))


def product(rho_a: DensityMatrix, rho_b: DensityMatrix) -> DensityMatrix:
    rho = np.kron(rho_a.data, rho_b.data)
    return DensityMatrix(rho, rho_a.dims + rho_b.dims)


def classical_quantum(weights, cond_states, basis=None) -> DensityMatrix:
    """sum_i q_i rho_i (x) |b_i><b_i| with {|b_i>} orthonormal on B.

    ``basis`` is a unitary whose columns are the B basis vectors; defaults to
    the computational basis.  Zero discord by construction when B is measured.
    """
    q = np.asarray(weights, dtype=float)
    if np.any(q < -1e-12) or abs(float(q.sum()) - 1.0) > 1e-9:
        raise InvalidParams(f"weights must be a probability vector, got {q.tolist()}")
    if len(cond_states) != q.size:
        raise InvalidParams(f"{q.size} weights but {len(cond_states)} conditional states")
    n = q.size
    da = cond_states[0].dim
    if any(s.dim != da for s in cond_states):
        raise InvalidParams("conditional states must share one dimension")
    if basis is None:
        basis = np.eye(n, dtype=complex)
    basis = np.asarray(basis, dtype=complex)
    if basis.shape != (n, n):
        raise InvalidParams(f"basis must be {n}x{n}, got {basis.shape}")
    if np.max(np.abs(basis.conj().T @ basis - np.eye(n))) > 1e-9:
        raise InvalidParams("basis columns are not orthonormal")
    rho = np.zeros((da * n, da * n), dtype=complex)
    for i in range(n):
        b = basis[:, i]
        rho += q[i] * np.kron(cond_states[i].data, np.outer(b, b.conj()))
    return DensityMatrix(rho, (da, n))


def random_ginibre(dims, rank=None, seed: int = 0) -> DensityMatrix:
    """G G^dag / tr(G G^dag) with G a d x rank complex Gaussian matrix."""
    dims = tuple(int(x) for x in (dims if np.iterable(dims) else [dims]))
    d = int(np.prod(dims))
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise InvalidParams(f"rank must lie in [1, {d}], got {rank}")
    rng = rng_for_seed(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    rho /= np.real(np.trace(rho))
    return DensityMatrix(rho, dims)


def random_pure(dims, seed: int = 0) -> DensityMatrix:
    """Projector onto a normalized complex Gaussian vector."""
    dims = tuple(int(x) for x in (dims if np.iterable(dims) else [dims]))
    d = int(np.prod(dims))
    rng = rng_for_seed(seed)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    v /= np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()), dims)


def ghz(n_qubits: int = 3) -> DensityMatrix:
    """(|0...0> + |1...1>)/sqrt(2) as a density matrix."""
    d = 2**n_qubits
    v = np.zeros(d, dtype=complex)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return DensityMatrix(np.outer(v, v.conj()), (2,) * n_qubits)


def _require(params: dict, key: str, family: str):
    if key not in params:
        raise InvalidParams(f"family {family!r} requires parameter {key!r}")
    return params[key]


def make(spec: StateSpec) -> DensityMatrix:
    """Build the state described by ``spec``; raises InvalidParams on bad input."""
    family, params = spec.family, dict(spec.params)
    if family == "bell":
        return bell(params.get("which", "phi_plus"))
    if family == "bell_diagonal":
        return bell_diagonal(_require(params, "p", family))
    if family == "werner":
        return werner(_require(params, "p", family))
    if family == "product":
        a, b = _require(params, "a", family), _require(params, "b", family)
        if not isinstance(a, DensityMatrix):
            a = validate_density(np.asarray(a, dtype=complex), [np.asarray(a).shape[0]])
        if not isinstance(b, DensityMatrix):
            b = validate_density(np.asarray(b, dtype=complex), [np.asarray(b).shape[0]])
        return product(a, b)
    if family == "classical_quantum":
        weights = _require(params, "weights", family)
        raw = _require(params, "states", family)
        cond = [
            s if isinstance(s, DensityMatrix)
            else validate_density(np.asarray(s, dtype=complex), [np.asarray(s).shape[0]])
            for s in raw
        ]
        return classical_quantum(weights, cond, params.get("basis"))
    if family == "random_ginibre":
        if spec.seed is None:
            raise InvalidParams("random_ginibre requires a seed")
        return random_ginibre(_require(params, "dims", family), params.get("rank"), spec.seed)
    if family == "random_pure":
        if spec.seed is None:
            raise InvalidParams("random_pure requires a seed")
        return random_pure(_require(params, "dims", family), spec.seed)
    if family == "custom":
        m = np.asarray(_require(params, "matrix", family), dtype=complex)
        dims = params.get("dims", [m.shape[0]])
        return validate_density(m, dims)
    raise InvalidParams(f"unknown family {family!r}; choose from {FAMILIES}")


def sample_batch(spec: StateSpec, n: int, root_seed: int):
    """n independent draws of a random family, item i seeded root_seed + i."""
    if spec.family not in ("random_ginibre", "random_pure"):
        raise InvalidParams(f"sample_batch needs a random family, got {spec.family!r}")
    if n < 1:
        raise InvalidParams(f"batch size must be >= 1, got {n}")
    out = []
    for i in range(int(n)):
        item = StateSpec(spec.family, spec.params, int(root_seed) + i)
        out.append(make(item))
    return out
