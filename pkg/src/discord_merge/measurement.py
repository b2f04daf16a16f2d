"""Measurements on subsystem B: POVMs, post-measurement ensembles, dilations.

A measurement is a finite list of PSD elements summing to identity on B.  The
default class is rank-1 projective; general POVMs are supported everywhere
except the fast optimizer path.  ``neumark_extend`` realizes any POVM as a
unitary on B plus an outcome register followed by a projective readout of the
register.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import (
    TOL,
    DensityMatrix,
    decode_matrix,
    encode_matrix,
    partial_trace,
    von_neumann_entropy,
)
from .errors import CompletionFailure, DimensionMismatch, InvalidMeasurement

# Outcomes with probability at or below this are flagged and excluded
# from entropy averages (never divided by).
PROB_FLOOR = 1e-12

PROJECTIVE = "projective"
POVM = "povm"


@dataclass(frozen=True, eq=False)
class Measurement:
    """POVM elements on one subsystem, optionally tagged rank-1 projective."""

    elements: tuple
    kind: str = POVM
    params: tuple | None = None

    def __post_init__(self):
        elements = tuple(np.array(e, dtype=complex) for e in self.elements)
        for e in elements:
            e.setflags(write=False)
        object.__setattr__(self, "elements", elements)
        if self.params is not None:
            object.__setattr__(self, "params", tuple(float(x) for x in self.params))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.elements)


@dataclass(frozen=True, eq=False)
class MeasuredEnsemble:
    """Outcome probabilities, conditional states of A, and the joint
    post-measurement state sum_i p_i rho_{A|i} (x) |i><i| (outcome register
    ordered in the dilation basis)."""

    probs: np.ndarray
    conditional_states: tuple
    post_joint: DensityMatrix
    outcome_projectors: tuple
    negligible: tuple  # True where p_i <= PROB_FLOOR; placeholder conditionals


@dataclass(frozen=True, eq=False)
class NeumarkDilation:
    """Unitary on B (x) register reproducing the POVM via a register readout."""

    ancilla_dim: int
    unitary: np.ndarray
    ancilla_projectors: tuple


def validate_measurement(elements, kind=POVM, params=None) -> Measurement:
    """Check PSD elements, completeness, and (if projective) orthogonality."""
    m = Measurement(tuple(elements), kind, params)
    d = m.dim
    total = np.zeros((d, d), dtype=complex)
    for i, e in enumerate(m.elements):
        if e.shape != (d, d):
            raise DimensionMismatch(f"element {i} has shape {e.shape}, expected {(d, d)}")
        herm = float(np.max(np.abs(e - e.conj().T)))
        if herm > TOL:
            raise InvalidMeasurement(f"element {i} not Hermitian, residual {herm:.3e}")
        min_eig = float(np.linalg.eigvalsh((e + e.conj().T) / 2).min())
        if min_eig < -TOL:
            raise InvalidMeasurement(f"element {i} not PSD, min eigenvalue {min_eig:.3e}")
        total += e
    completeness = float(np.max(np.abs(total - np.eye(d))))
    if completeness > TOL:
        raise InvalidMeasurement(f"elements do not sum to identity, residual {completeness:.3e}")
    if kind == PROJECTIVE:
        for i, e in enumerate(m.elements):
            idem = float(np.max(np.abs(e @ e - e)))
            tr = abs(float(np.real(np.trace(e))) - 1.0)
            if idem > TOL or tr > TOL:
                raise InvalidMeasurement(
                    f"element {i} is not a rank-1 projector "
                    f"(idempotency residual {idem:.3e}, trace residual {tr:.3e})"
                )
        for i in range(m.n_outcomes):
            for j in range(i + 1, m.n_outcomes):
                ortho = float(np.max(np.abs(m.elements[i] @ m.elements[j])))
                if ortho > TOL:
                    raise InvalidMeasurement(
                        f"projectors {i} and {j} are not orthogonal, residual {ortho:.3e}"
                    )
    return m


def projective_qubit(theta: float, phi: float) -> Measurement:
    """Two orthogonal rank-1 projectors along the Bloch direction
    (sin t cos p, sin t sin p, cos t) and its antipode."""
    nx = np.sin(theta) * np.cos(phi)
    ny = np.sin(theta) * np.sin(phi)
    nz = np.cos(theta)
    plus = 0.5 * np.array([[1 + nz, nx - 1j * ny], [nx + 1j * ny, 1 - nz]], dtype=complex)
    minus = np.eye(2, dtype=complex) - plus
    return Measurement((plus, minus), PROJECTIVE, (float(theta), float(phi)))


def projective_from_unitary(u: np.ndarray) -> Measurement:
    """Rank-1 projective measurement onto the columns of a unitary."""
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    if u.shape != (d, d) or np.max(np.abs(u.conj().T @ u - np.eye(d))) > TOL:
        raise InvalidMeasurement("basis matrix is not unitary")
    elements = tuple(np.outer(u[:, k], u[:, k].conj()) for k in range(d))
    return Measurement(elements, PROJECTIVE)


def _psd_sqrt(e: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(e)
    w = np.sqrt(np.clip(np.real(w), 0.0, None))
    return (v * w) @ v.conj().T


def neumark_extend(m: Measurement) -> NeumarkDilation:
    """Dilate a POVM to a unitary on B (x) register.

    The register has one dimension per outcome and starts in |0>.  The
    constructed unitary satisfies <i|_C U |psi>_B |0>_C = M_i |psi> with
    M_i = sqrt(E_i); the remaining columns are an orthonormal completion.

    Raises :class:`CompletionFailure` if the completion falls below rank,
    which signals a numerically degenerate POVM.
    """
    d, n = m.dim, m.n_outcomes
    kraus = [_psd_sqrt(e) for e in m.elements]
    # Isometry V: |b'>_B -> sum_i M_i|b'> (x) |i>, composite index b*n + i.
    iso = np.zeros((d * n, d), dtype=complex)
    for i, k in enumerate(kraus):
        iso[i::n, :] = k
    iso_residual = float(np.max(np.abs(iso.conj().T @ iso - np.eye(d))))
    if iso_residual > 1e-8:
        raise CompletionFailure(
            f"Kraus columns are not isometric (residual {iso_residual:.3e}); "
            "the POVM is numerically degenerate"
        )
    complement = scipy.linalg.null_space(iso.conj().T)
    if complement.shape[1] != d * n - d:
        raise CompletionFailure(
            f"orthonormal completion has rank {complement.shape[1]}, need {d * n - d}"
        )
    unitary = np.zeros((d * n, d * n), dtype=complex)
    filled = 0
    for col in range(d * n):
        b, c = divmod(col, n)
        if c == 0:
            unitary[:, col] = iso[:, b]
        else:
            unitary[:, col] = complement[:, filled]
            filled += 1
    unitarity = float(np.max(np.abs(unitary.conj().T @ unitary - np.eye(d * n))))
    if unitarity > 1e-8:
        raise CompletionFailure(f"completed matrix is not unitary (residual {unitarity:.3e})")
    projectors = tuple(
        np.diag(np.eye(n, dtype=complex)[i]).copy() for i in range(n)
    )
    return NeumarkDilation(n, unitary, projectors)


def measure_B(state: DensityMatrix, m: Measurement) -> MeasuredEnsemble:
    """Apply a measurement to the second subsystem of a bipartite state.

    Probabilities are p_i = tr[(I (x) E_i) rho] and conditional states are
    rho_{A|i} = tr_B[(I (x) E_i) rho] / p_i.  Outcomes with p_i below the
    probability floor are flagged and carry a maximally mixed placeholder.
    """
    if state.n_subsystems != 2:
        raise DimensionMismatch(f"need a bipartite state, got dims {state.dims}")
    da, db = state.dims
    if m.dim != db:
        raise DimensionMismatch(f"measurement acts on dimension {m.dim}, B has {db}")
    rho_t = state.data.reshape(da, db, da, db)
    n = m.n_outcomes

    probs = np.zeros(n)
    conds, flags = [], []
    for i, e in enumerate(m.elements):
        block = np.einsum("be,aecb->ac", e, rho_t)
        block = (block + block.conj().T) / 2
        p = float(np.real(np.trace(block)))
        probs[i] = p
        if p <= PROB_FLOOR:
            flags.append(True)
            conds.append(DensityMatrix(np.eye(da, dtype=complex) / da, (da,)))
        else:
            flags.append(False)
            conds.append(DensityMatrix(block / p, (da,)))

    joint = np.zeros((da * n, da * n), dtype=complex)
    projectors = []
    for i in range(n):
        pi = np.zeros((n, n), dtype=complex)
        pi[i, i] = 1.0
        projectors.append(pi)
        if not flags[i]:
            joint += probs[i] * np.kron(conds[i].data, pi)
    post_joint = DensityMatrix(joint, (da, n))
    return MeasuredEnsemble(probs, tuple(conds), post_joint, tuple(projectors), tuple(flags))


def conditional_entropy_measured(e: MeasuredEnsemble) -> float:
    """sum_i p_i S(rho_{A|i}) in bits; negligible outcomes contribute 0."""
    total = 0.0
    for p, cond, skip in zip(e.probs, e.conditional_states, e.negligible):
        if not skip:
            total += p * von_neumann_entropy(cond)
    return total


def post_measurement_mutual_info(state: DensityMatrix, m: Measurement) -> float:
    """Mutual information left after measuring B: S(A) - sum p_i S(rho_{A|i}).

    Cross-computed from the entropies of the joint post-measurement state;
    the two routes must agree within 1e-8.
    """
    ens = measure_B(state, m)
    rho_a = partial_trace(state, {0})
    via_ensemble = von_neumann_entropy(rho_a) - conditional_entropy_measured(ens)

    joint = ens.post_joint
    s_a = von_neumann_entropy(partial_trace(joint, {0}))
    s_b = von_neumann_entropy(partial_trace(joint, {1}))
    s_ab = von_neumann_entropy(joint)
    via_joint = s_a + s_b - s_ab
    if abs(via_ensemble - via_joint) > 1e-8:
        raise ArithmeticError(
            f"post-measurement mutual information routes disagree: "
            f"{via_ensemble} vs {via_joint}"
        )
    return via_ensemble


# --- measurement exchange format ---------------------------------------------


def encode_measurement(m: Measurement) -> dict:
    out = {
        "kind": m.kind,
        "elements": [encode_matrix(e, [m.dim]) for e in m.elements],
    }
    if m.params is not None:
        out["params"] = list(m.params)
    return out


def decode_measurement(obj: dict) -> Measurement:
    kind = obj.get("kind", POVM)
    if kind not in (PROJECTIVE, POVM):
        raise InvalidMeasurement(f"unknown measurement kind {kind!r}")
    elements = [decode_matrix(e)[0] for e in obj["elements"]]
    params = obj.get("params")
    return validate_measurement(elements, kind, params)
