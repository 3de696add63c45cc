"""Dense linear algebra and Hilbert-space primitives for qubit(s) x oscillator.

Index layout: qubit indices are the slow axis, the Fock index is the fast
axis. A basis state with qubit bitstring ``s`` (qubit 0 = most significant
bit, bit value 1 = spin down) and ``n`` phonons sits at flat index
``s * (n_max + 1) + n``. All frequencies are angular (rad/s) throughout the
package; configuration loaders convert from cyclic Hz.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm as _scipy_expm

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
TRUNCATION_TOL = 1e-8

# Pauli matrices in the {|up>, |down>} basis: |up> = (1,0), |down> = (0,1)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

SPIN_UP = np.array([1.0, 0.0], dtype=complex)
SPIN_DOWN = np.array([0.0, 1.0], dtype=complex)


class DimensionError(ValueError):
    """Operands act on incompatible Hilbert spaces."""


def sigma_axis(axis) -> np.ndarray:
    """Pauli operator n.sigma for a unit vector ``axis`` = (nx, ny, nz)."""
    n = np.asarray(axis, dtype=float)
    if n.shape != (3,):
        raise ValueError("axis must be a 3-vector")
    norm = np.linalg.norm(n)
    if not np.isclose(norm, 1.0, atol=1e-9):
        raise ValueError(f"axis must be a unit vector, |n| = {norm}")
    return n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z


def destroy(n_max: int) -> np.ndarray:
    """Annihilation operator on the truncated Fock space {0..n_max}."""
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    d = n_max + 1
    a = np.zeros((d, d), dtype=complex)
    ns = np.arange(1, d)
    a[ns - 1, ns] = np.sqrt(ns)
    return a


def create(n_max: int) -> np.ndarray:
    return destroy(n_max).conj().T


def number(n_max: int) -> np.ndarray:
    return np.diag(np.arange(n_max + 1).astype(complex))


@dataclass(frozen=True)
class OperatorSet:
    """Operators for ``n_qubits`` qubits coupled to one truncated oscillator.

    Qubit operators and oscillator operators are embedded in the full
    product space (qubits slow, Fock fast). ``sx/sy/sz/sp/sm`` are indexed
    by qubit.
    """

    n_qubits: int
    n_max: int
    a: np.ndarray
    ad: np.ndarray
    n_op: np.ndarray
    identity: np.ndarray
    sx: tuple = field(repr=False, default=())
    sy: tuple = field(repr=False, default=())
    sz: tuple = field(repr=False, default=())
    sp: tuple = field(repr=False, default=())
    sm: tuple = field(repr=False, default=())

    @property
    def dim(self) -> int:
        return 2**self.n_qubits * (self.n_max + 1)

    def spin(self, op2: np.ndarray, qubit: int = 0) -> np.ndarray:
        """Embed a single-qubit operator on ``qubit`` into the full space."""
        return self.spin_motion(op2, np.eye(self.n_max + 1, dtype=complex), qubit)

    def motion(self, op_m: np.ndarray) -> np.ndarray:
        """Embed an oscillator operator into the full space."""
        full = np.eye(2**self.n_qubits, dtype=complex)
        return np.kron(full, op_m)

    def spin_motion(self, op2: np.ndarray, op_m: np.ndarray, qubit: int = 0) -> np.ndarray:
        """Embed ``op2`` on ``qubit`` times ``op_m`` on the oscillator."""
        if not 0 <= qubit < self.n_qubits:
            raise DimensionError(f"qubit {qubit} out of range for {self.n_qubits} qubits")
        spin_full = np.array([[1.0 + 0.0j]])
        for q in range(self.n_qubits):
            spin_full = np.kron(spin_full, op2 if q == qubit else IDENTITY_2)
        return np.kron(spin_full, op_m)

    def sigma_axis(self, axis, qubit: int = 0) -> np.ndarray:
        return self.spin(sigma_axis(axis), qubit)

    def collective_pauli(self, axis, projections) -> np.ndarray:
        """Sum_j e_j * sigma_axis on qubit j, for mode projections e_j."""
        e = np.asarray(projections, dtype=float)
        if e.shape != (self.n_qubits,):
            raise DimensionError(
                f"projection vector has length {e.shape}, expected {self.n_qubits}"
            )
        s2 = sigma_axis(axis)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for q in range(self.n_qubits):
            if e[q] != 0.0:
                out += e[q] * self.spin(s2, q)
        return out


def build_operators(n_max: int, n_qubits: int = 1) -> OperatorSet:
    """Construct the operator set for ``n_qubits`` qubits and one oscillator.

    Satisfies a|n> = sqrt(n)|n-1>, a^dag|n> = sqrt(n+1)|n+1> up to the
    truncation edge; operators on distinct qubits commute by construction.
    """
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    if n_qubits < 1:
        raise ValueError(f"n_qubits must be >= 1, got {n_qubits}")
    a1 = destroy(n_max)
    dspin = 2**n_qubits
    ident = np.eye(dspin * (n_max + 1), dtype=complex)
    ops = OperatorSet(
        n_qubits=n_qubits,
        n_max=n_max,
        a=np.kron(np.eye(dspin, dtype=complex), a1),
        ad=np.kron(np.eye(dspin, dtype=complex), a1.conj().T),
        n_op=np.kron(np.eye(dspin, dtype=complex), number(n_max)),
        identity=ident,
    )
    object.__setattr__(ops, "sx", tuple(ops.spin(SIGMA_X, q) for q in range(n_qubits)))
    object.__setattr__(ops, "sy", tuple(ops.spin(SIGMA_Y, q) for q in range(n_qubits)))
    object.__setattr__(ops, "sz", tuple(ops.spin(SIGMA_Z, q) for q in range(n_qubits)))
    object.__setattr__(ops, "sp", tuple(ops.spin(SIGMA_PLUS, q) for q in range(n_qubits)))
    object.__setattr__(ops, "sm", tuple(ops.spin(SIGMA_MINUS, q) for q in range(n_qubits)))
    return ops


def basis_index(n_qubits: int, n_max: int, spin_bits, n: int) -> int:
    """Flat index of |spin_bits>|n> (bit 1 = spin down, qubit 0 slowest)."""
    bits = list(spin_bits) if not isinstance(spin_bits, int) else None
    if bits is None:
        s = spin_bits
        if not 0 <= s < 2**n_qubits:
            raise ValueError("spin index out of range")
    else:
        if len(bits) != n_qubits:
            raise ValueError("one bit per qubit required")
        s = 0
        for b in bits:
            s = (s << 1) | int(b)
    if not 0 <= n <= n_max:
        raise ValueError("Fock index out of range")
    return s * (n_max + 1) + n


def split_index(n_qubits: int, n_max: int, flat: int):
    """Inverse of :func:`basis_index`: flat index -> (spin index, fock index)."""
    d = n_max + 1
    return flat // d, flat % d


def matrix_exponential(A: np.ndarray, scale: complex = 1.0) -> np.ndarray:
    """exp(scale * A) by scaling-and-squaring Pade (scipy.linalg.expm).

    Rejects non-finite input and dimensions above 4096.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    if A.shape[0] > 4096:
        raise DimensionError(f"dimension {A.shape[0]} exceeds the 4096 limit")
    if not np.all(np.isfinite(A.view(float))):
        raise ValueError("matrix contains non-finite entries")
    if not np.isfinite(scale.real) or not np.isfinite(complex(scale).imag):
        raise ValueError("scale must be finite")
    return _scipy_expm(scale * A)


def is_hermitian(A: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return np.max(np.abs(A - A.conj().T)) < tol * max(1.0, np.max(np.abs(A)))

def is_unitary(U: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    d = U.shape[0]
    return np.max(np.abs(U.conj().T @ U - np.eye(d))) < tol


def global_phase_align(U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Return e^{i phi} U with phi chosen to maximize |Tr(U^dag V)| overlap."""
    tr = np.trace(U.conj().T @ V)
    if abs(tr) < 1e-300:
        return U
    return U * (tr / abs(tr))


def operator_distance(U: np.ndarray, V: np.ndarray, align_phase: bool = True) -> float:
    """Frobenius distance between operators, optionally after global-phase alignment."""
    if U.shape != V.shape:
        raise DimensionError(f"shape mismatch {U.shape} vs {V.shape}")
    if align_phase:
        U = global_phase_align(U, V)
    return float(np.linalg.norm(U - V))


def coherent_amplitudes(alpha: complex, n_max: int) -> np.ndarray:
    """Fock amplitudes e^{-|a|^2/2} a^n / sqrt(n!) of a coherent state."""
    ns = np.arange(n_max + 1)
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, n_max + 1)))))
    mag = np.exp(-abs(alpha) ** 2 / 2 + ns * np.log(abs(alpha) + 1e-300) - log_fact / 2)
    return mag * np.exp(1j * ns * np.angle(alpha))


@dataclass
class SpinMotionState:
    """Pure state or density matrix on qubits x truncated Fock space.

    ``data`` is a flat vector (pure) or a square matrix (density operator)
    over the product basis described in the module docstring.
    """

    n_qubits: int
    n_max: int
    data: np.ndarray

    NORM_TOL = 1e-10
    POSITIVITY_FLOOR = -1e-9

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        d = self.dim
        if self.data.shape not in ((d,), (d, d)):
            raise DimensionError(
                f"state data shape {self.data.shape} incompatible with dim {d}"
            )

    @classmethod
    def pure(cls, spin_amplitudes, fock_n: int, n_max: int) -> "SpinMotionState":
        """|spin> x |fock_n> for one or more qubits from spin amplitudes."""
        spin = np.asarray(spin_amplitudes, dtype=complex).ravel()
        n_qubits = int(np.round(np.log2(spin.size)))
        if 2**n_qubits != spin.size:
            raise DimensionError("spin amplitude length must be a power of two")
        motion = np.zeros(n_max + 1, dtype=complex)
        motion[fock_n] = 1.0
        return cls(n_qubits, n_max, np.kron(spin, motion))

    @classmethod
    def from_spin_motion(cls, spin, motion) -> "SpinMotionState":
        spin = np.asarray(spin, dtype=complex).ravel()
        motion = np.asarray(motion, dtype=complex).ravel()
        n_qubits = int(np.round(np.log2(spin.size)))
        if 2**n_qubits != spin.size:
            raise DimensionError("spin amplitude length must be a power of two")
        return cls(n_qubits, len(motion) - 1, np.kron(spin, motion))

    @property
    def dim(self) -> int:
        return 2**self.n_qubits * (self.n_max + 1)

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 1

    def density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    def norm_error(self) -> float:
        """|<psi|psi> - 1| for pure states, |Tr rho - 1| for density matrices."""
        if self.is_pure:
            return abs(float(np.vdot(self.data, self.data).real) - 1.0)
        return abs(float(np.trace(self.data).real) - 1.0)

    def validate(self):
        """Enforce normalization / Hermiticity / positivity invariants."""
        if self.norm_error() >= self.NORM_TOL:
            raise ValueError(f"state norm error {self.norm_error():.2e} exceeds tolerance")
        if not self.is_pure:
            if np.max(np.abs(self.data - self.data.conj().T)) > 1e-10:
                raise ValueError("density matrix is not Hermitian")
            if np.min(np.linalg.eigvalsh(self.data)) <= self.POSITIVITY_FLOOR:
                raise ValueError("density matrix has a negative eigenvalue")
        return self

    def _spin_motion_tensor(self):
        d = self.n_max + 1
        ds = 2**self.n_qubits
        if self.is_pure:
            return self.data.reshape(ds, d)
        return self.data.reshape(ds, d, ds, d)

    def spin_reduced(self) -> np.ndarray:
        """Reduced spin density matrix (motion traced out)."""
        t = self._spin_motion_tensor()
        if self.is_pure:
            return t @ t.conj().T
        return np.trace(t, axis1=1, axis2=3)

    def motion_reduced(self) -> np.ndarray:
        t = self._spin_motion_tensor()
        if self.is_pure:
            return t.T @ t.conj()
        return np.trace(t, axis1=0, axis2=2)

    def fock_populations(self) -> np.ndarray:
        return np.real(np.diag(self.motion_reduced()))

    def top2_population(self) -> float:
        """Population in the top two Fock levels (truncation-health metric)."""
        pops = self.fock_populations()
        return float(pops[-2] + pops[-1])

    def truncation_healthy(self, tol: float = TRUNCATION_TOL) -> bool:
        return self.top2_population() < tol

    def entanglement_entropy(self) -> float:
        """Von Neumann entropy of the spin subsystem (pure states only)."""
        if not self.is_pure:
            raise ValueError("entanglement entropy defined here for pure states")
        ev = np.linalg.eigvalsh(self.spin_reduced())
        ev = ev[ev > 1e-18]
        return float(-np.sum(ev * np.log(ev)))


def expectation(state: SpinMotionState, A: np.ndarray) -> complex:
    """<psi|A|psi> or Tr(rho A)."""
    A = np.asarray(A, dtype=complex)
    if A.shape != (state.dim, state.dim):
        raise DimensionError(
            f"operator shape {A.shape} does not match state dim {state.dim}"
        )
    if state.is_pure:
        return complex(np.vdot(state.data, A @ state.data))
    return complex(np.trace(state.data @ A))


def partial_transpose_2q(rho4: np.ndarray) -> np.ndarray:
    """Partial transpose over the first qubit of a two-qubit density matrix."""
    if rho4.shape != (4, 4):
        raise DimensionError("expected a 4x4 two-qubit density matrix")
    t = rho4.reshape(2, 2, 2, 2)
    return np.transpose(t, (2, 1, 0, 3)).reshape(4, 4)


def negativity_2q(rho4: np.ndarray) -> float:
    """Entanglement negativity (||rho^T_A||_1 - 1)/2 of a two-qubit state."""
    ev = np.linalg.eigvalsh(partial_transpose_2q(rho4))
    return float((np.sum(np.abs(ev)) - 1.0) / 2.0)
