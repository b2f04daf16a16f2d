"""Dense linear algebra for finite-dimensional quantum states.

Density matrices are stored as immutable complex128 arrays together with an
ordered list of subsystem dimensions.  All entropies are in bits (log base 2).
Tolerance clipping happens only inside entropy evaluation; stored matrices are
never mutated.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadSubsystemIndex,
    DimensionMismatch,
    NotHermitian,
    NotPositive,
    NotUnitary,
    TraceNotOne,
)

# Residual budget for Hermiticity / positivity / trace checks.
TOL = 1e-9
# Eigenvalues at or below this contribute nothing to entropies (0*log 0 = 0).
EIG_FLOOR = 1e-12


def _frozen_array(a) -> np.ndarray:
    out = np.array(a, dtype=complex, order="C")
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, PSD, unit-trace matrix with a subsystem factorization.

    ``dims`` lists the dimension of each tensor factor in order; their
    product must equal the matrix size.  Instances are immutable and safe to
    share between threads.  Use :func:`validate_density` when the matrix
    comes from an untrusted source.
    """

    data: np.ndarray
    dims: tuple
    labels: tuple | None = None

    def __post_init__(self):
        data = _frozen_array(self.data)
        dims = tuple(int(d) for d in self.dims)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise DimensionMismatch(f"matrix must be square, got shape {data.shape}")
        if any(d < 1 for d in dims) or int(np.prod(dims)) != data.shape[0]:
            raise DimensionMismatch(
                f"product of dims {dims} does not match matrix size {data.shape[0]}"
            )
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "dims", dims)
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != len(dims):
                raise DimensionMismatch(
                    f"{len(labels)} labels for {len(dims)} subsystems"
                )
            object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)


@dataclass(frozen=True, eq=False)
class PureState:
    """State vector with a subsystem factorization (squared norm 1)."""

    amplitudes: np.ndarray
    dims: tuple

    def __post_init__(self):
        amp = _frozen_array(self.amplitudes).reshape(-1)
        dims = tuple(int(d) for d in self.dims)
        if int(np.prod(dims)) != amp.size:
            raise DimensionMismatch(
                f"product of dims {dims} does not match vector size {amp.size}"
            )
        norm2 = float(np.real(np.vdot(amp, amp)))
        if abs(norm2 - 1.0) > TOL:
            raise TraceNotOne(f"squared norm is {norm2}, residual {abs(norm2 - 1.0):.3e}")
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "dims", dims)

    def to_density(self) -> DensityMatrix:
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()), self.dims)


def validate_density(data, dims, labels=None) -> DensityMatrix:
    """Check all density-matrix invariants and wrap the result.

    Raises :class:`NotHermitian`, :class:`NotPositive`, :class:`TraceNotOne`
    or :class:`DimensionMismatch`; each message names the violated invariant
    and the measured residual.  The stored matrix is the input as given;
    nothing is clipped or renormalized.
    """
    m = np.asarray(data, dtype=complex)
    dims = tuple(int(d) for d in dims)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got shape {m.shape}")
    if any(d < 1 for d in dims) or int(np.prod(dims)) != m.shape[0]:
        raise DimensionMismatch(
            f"product of dims {dims} does not match matrix size {m.shape[0]}"
        )
    herm_residual = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if herm_residual > TOL:
        raise NotHermitian(f"max |M - M^dag| = {herm_residual:.3e} exceeds {TOL}")
    trace_residual = abs(float(np.real(np.trace(m))) - 1.0)
    if trace_residual > TOL:
        raise TraceNotOne(f"|tr(M) - 1| = {trace_residual:.3e} exceeds {TOL}")
    min_eig = float(np.linalg.eigvalsh((m + m.conj().T) / 2.0).min())
    if min_eig < -TOL:
        raise NotPositive(f"min eigenvalue = {min_eig:.3e} below -{TOL}")
    return DensityMatrix(m, dims, labels)


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """Kronecker product; dims are concatenated."""
    labels = None
    if a.labels is not None and b.labels is not None:
        labels = a.labels + b.labels
    return DensityMatrix(np.kron(a.data, b.data), a.dims + b.dims, labels)


def partial_trace(state: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state on the subsystems in ``keep``.

    Parameters
    ----------
    state : DensityMatrix
    keep : iterable of int
        Indices of the subsystems to retain.  The output keeps them in their
        original order regardless of the iteration order of ``keep``.
    """
    keep = sorted(set(int(k) for k in keep))
    n = state.n_subsystems
    if not keep:
        raise BadSubsystemIndex("keep set must be nonempty")
    if keep[0] < 0 or keep[-1] >= n:
        raise BadSubsystemIndex(f"subsystem indices {keep} out of range for {n} subsystems")
    dims = list(state.dims)
    t = state.data.reshape(dims + dims)
    for idx in sorted(set(range(n)) - set(keep), reverse=True):
        t = np.trace(t, axis1=idx, axis2=idx + len(dims))
        dims.pop(idx)
    d = int(np.prod(dims))
    labels = None
    if state.labels is not None:
        labels = tuple(state.labels[k] for k in keep)
    return DensityMatrix(t.reshape(d, d), dims, labels)


def permute_subsystems(state: DensityMatrix, order) -> DensityMatrix:
    """Reorder the tensor factors; ``order[k]`` is the old index of new slot k."""
    order = [int(k) for k in order]
    n = state.n_subsystems
    if sorted(order) != list(range(n)):
        raise BadSubsystemIndex(f"{order} is not a permutation of 0..{n - 1}")
    dims = list(state.dims)
    t = state.data.reshape(dims + dims)
    t = t.transpose(order + [n + k for k in order])
    new_dims = tuple(dims[k] for k in order)
    d = state.dim
    labels = None
    if state.labels is not None:
        labels = tuple(state.labels[k] for k in order)
    return DensityMatrix(t.reshape(d, d), new_dims, labels)


def entropy_from_eigenvalues(eigenvalues) -> float:
    """Shannon entropy in bits of a (clipped) eigenvalue list."""
    w = np.clip(np.real(np.asarray(eigenvalues, dtype=float)), 0.0, 1.0)
    w = w[w > EIG_FLOOR]
    if w.size == 0:
        return 0.0
    return float(-(w @ np.log2(w)))


def entropy_of_matrix(mat: np.ndarray) -> float:
    """Von Neumann entropy in bits of a raw Hermitian matrix."""
    return entropy_from_eigenvalues(np.linalg.eigvalsh(mat))


def von_neumann_entropy(state: DensityMatrix) -> float:
    """-sum(lam log2 lam) over the eigenvalues, in bits."""
    return entropy_of_matrix(state.data)


def purity(state: DensityMatrix) -> float:
    """tr(rho^2); equals 1 for pure states."""
    return float(np.real(np.trace(state.data @ state.data)))


def purify(state: DensityMatrix) -> PureState:
    """Purification with a reference slot of dimension = numerical rank.

    The returned vector lives on ``state.dims + (r,)`` where r counts
    eigenvalues above the floor; tracing out the appended slot recovers the
    input.
    """
    w, v = np.linalg.eigh(state.data)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    w = np.clip(np.real(w), 0.0, None)
    r = max(1, int(np.sum(w > EIG_FLOOR)))
    amp = (v[:, :r] * np.sqrt(w[:r])).reshape(-1)
    amp = amp / np.linalg.norm(amp)
    return PureState(amp, state.dims + (r,))


def apply_unitary(state: DensityMatrix, u: np.ndarray, on) -> DensityMatrix:
    """Conjugate by ``u`` acting on the given subsystems (identity elsewhere).

    ``u`` must be unitary on the product of the targeted dimensions, taken in
    ascending index order.
    """
    on = sorted(set(int(k) for k in on))
    n = state.n_subsystems
    if not on:
        raise BadSubsystemIndex("target set must be nonempty")
    if on[0] < 0 or on[-1] >= n:
        raise BadSubsystemIndex(f"subsystem indices {on} out of range for {n} subsystems")
    u = np.asarray(u, dtype=complex)
    d_on = int(np.prod([state.dims[k] for k in on]))
    if u.shape != (d_on, d_on):
        raise DimensionMismatch(
            f"unitary shape {u.shape} does not match targeted dimension {d_on}"
        )
    unitary_residual = float(np.max(np.abs(u.conj().T @ u - np.eye(d_on))))
    if unitary_residual > TOL:
        raise NotUnitary(f"max |U^dag U - I| = {unitary_residual:.3e} exceeds {TOL}")

    rest = [k for k in range(n) if k not in on]
    perm = on + rest
    moved = permute_subsystems(state, perm)
    d_rest = int(np.prod([state.dims[k] for k in rest])) if rest else 1
    u_full = np.kron(u, np.eye(d_rest))
    rotated = DensityMatrix(u_full @ moved.data @ u_full.conj().T, moved.dims, moved.labels)
    inverse = [perm.index(k) for k in range(n)]
    return permute_subsystems(rotated, inverse)


def dephase_subsystem(state: DensityMatrix, index: int) -> DensityMatrix:
    """Zero all coherences of one subsystem in its computational basis."""
    index = int(index)
    n = state.n_subsystems
    if index < 0 or index >= n:
        raise BadSubsystemIndex(f"subsystem index {index} out of range")
    dims = list(state.dims)
    dk = dims[index]
    t = state.data.reshape(dims + dims).copy()
    t = np.moveaxis(t, (index, index + n), (0, 1))
    t *= np.eye(dk).reshape((dk, dk) + (1,) * (2 * n - 2))
    t = np.moveaxis(t, (0, 1), (index, index + n))
    return DensityMatrix(t.reshape(state.dim, state.dim), state.dims, state.labels)


# --- matrix exchange format (shared with the CLI) ---------------------------


def encode_matrix(data: np.ndarray, dims) -> dict:
    """Serialize a complex matrix as {"dims", "re", "im"} (row-major)."""
    m = np.asarray(data, dtype=complex)
    return {
        "dims": [int(d) for d in dims],
        "re": np.real(m).tolist(),
        "im": np.imag(m).tolist(),
    }


def decode_matrix(obj: dict):
    """Inverse of :func:`encode_matrix`; returns (matrix, dims)."""
    try:
        dims = tuple(int(d) for d in obj["dims"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise DimensionMismatch(f"malformed matrix payload: {exc}") from exc
    if re.shape != im.shape or re.ndim != 2:
        raise DimensionMismatch(
            f"re/im parts must be equal-shaped 2-d arrays, got {re.shape} and {im.shape}"
        )
    return re + 1j * im, dims
