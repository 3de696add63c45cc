"""Gate configurations and time-dependent Hamiltonian builders.

Every Hamiltonian is represented as a :class:`HamiltonianSchedule`, a sum of
terms ``envelope(t) * [osc(t) * A + conj(osc(t)) * A^dag]`` with a dense
matrix A, a real envelope, and a complex oscillation ``exp(i(w0 t + phase)) *
trig(w1 t)``. The +h.c. structure makes every schedule Hermitian by
construction, and the parametric form packs into flat arrays for the
integrator kernels.

Detuning-sign convention: the abstract gate drive uses a^dag exp(-i Delta t)
with Delta > 0, so one closed loop imprints exp(-i theta/2 cos(phi) sigma_n)
on the spin, the rotation sense of the nominal target U = exp(-i theta
sigma_n / 2). The microwave implementation (real cos/sin drives) contains
both tones; its effective gate comes out with the opposite sense, and the
addressing module measures fidelity against that target.
"""

import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import j1 as bessel_j1

from . import qops

TWO_PI = 2.0 * np.pi

# Argument of the first maximum of the Bessel function J1, used as the
# default microwave drive strength 4*Omega_mu/delta (maximizes the dressed
# spin-dependent force).
J1_PEAK_ARGUMENT = 1.8411837813406593


# ---------------------------------------------------------------------------
# envelopes and oscillations


@dataclass(frozen=True)
class Envelope:
    """Real amplitude profile: constant, or a sin^2 ramp window.

    The ramp rises as sin^2(pi t / (2 t_r)) over [0, t_r], holds 1 until
    t_total - t_r, and falls symmetrically; it is zero outside [0, t_total].
    """

    kind: str = "const"  # "const" | "sin2"
    t_r: float = 0.0
    t_total: float = 0.0

    def __post_init__(self):
        if self.kind not in ("const", "sin2"):
            raise ValueError(f"unknown envelope kind {self.kind!r}")
        if self.kind == "sin2":
            if self.t_r <= 0.0 or self.t_total <= 0.0:
                raise ValueError("sin2 envelope needs positive t_r and t_total")
            if 2.0 * self.t_r > self.t_total + 1e-18:
                raise ValueError("ramps overlap: need t_total >= 2 t_r")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "const":
            return np.ones_like(t)
        up = np.sin(np.pi * np.clip(t, 0.0, self.t_r) / (2.0 * self.t_r)) ** 2
        down = np.sin(
            np.pi * np.clip(self.t_total - t, 0.0, self.t_r) / (2.0 * self.t_r)
        ) ** 2
        val = np.minimum(up, down)
        return np.where((t < 0.0) | (t > self.t_total), 0.0, val)

    def breakpoints(self) -> tuple:
        """Times where the envelope has a kink (integration must not straddle them)."""
        if self.kind == "const":
            return ()
        return (self.t_r, self.t_total - self.t_r)


def constant_envelope() -> Envelope:
    return Envelope("const")


def ramp_envelope(t_r: float, t_total: float) -> Envelope:
    """sin^2 on/off ramp reaching full amplitude at t_r (see module notes)."""
    return Envelope("sin2", t_r=t_r, t_total=t_total)


_TRIG_NONE, _TRIG_COS, _TRIG_SIN = 0, 1, 2
_TRIG_CODE = {"none": _TRIG_NONE, "cos": _TRIG_COS, "sin": _TRIG_SIN}


@dataclass(frozen=True)
class Oscillation:
    """Complex phase factor exp(i (w0 t + phase)) * trig(w1 t)."""

    w0: float = 0.0
    phase: float = 0.0
    trig: str = "none"  # "none" | "cos" | "sin"
    w1: float = 0.0

    def __post_init__(self):
        if self.trig not in _TRIG_CODE:
            raise ValueError(f"unknown trig factor {self.trig!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        z = np.exp(1j * (self.w0 * t + self.phase))
        if self.trig == "cos":
            z = z * np.cos(self.w1 * t)
        elif self.trig == "sin":
            z = z * np.sin(self.w1 * t)
        return z

    def frequencies(self) -> tuple:
        """Angular frequencies present in this factor."""
        if self.trig == "none":
            return (abs(self.w0),)
        return (abs(self.w0 - self.w1), abs(self.w0 + self.w1))


@dataclass(frozen=True)
class Term:
    """One schedule term: envelope(t) * [osc(t) * op + conj(osc(t)) * op^dag]."""

    op: np.ndarray
    envelope: Envelope = field(default_factory=constant_envelope)
    osc: Oscillation = field(default_factory=Oscillation)


@dataclass(frozen=True)
class HamiltonianSchedule:
    """Hermitian time-dependent Hamiltonian as a sum of parametric terms."""

    terms: tuple
    duration: float
    n_qubits: int
    n_max: int

    def __post_init__(self):
        if not self.terms:
            raise ValueError("schedule needs at least one term")
        d = self.dim
        for term in self.terms:
            if term.op.shape != (d, d):
                raise qops.DimensionError(
                    f"term operator shape {term.op.shape}, expected {(d, d)}"
                )
        if self.duration <= 0.0:
            raise ValueError("duration must be positive")

    @property
    def dim(self) -> int:
        return 2**self.n_qubits * (self.n_max + 1)

    def hamiltonian(self, t: float) -> np.ndarray:
        """Dense H(t); Hermitian by the +h.c. term structure."""
        H = np.zeros((self.dim, self.dim), dtype=complex)
        for term in self.terms:
            c = complex(term.osc(t)) * float(term.envelope(t))
            if c != 0.0:
                H += c * term.op + np.conj(c) * term.op.conj().T
        return H

    def frequencies(self) -> tuple:
        """All oscillation frequencies present, sorted ascending."""
        freqs = set()
        for term in self.terms:
            freqs.update(term.osc.frequencies())
        return tuple(sorted(freqs))

    def max_frequency(self) -> float:
        return max(self.frequencies())

    def breakpoints(self) -> tuple:
        """Envelope kink times within (0, duration), sorted."""
        pts = set()
        for term in self.terms:
            for t in term.envelope.breakpoints():
                if 0.0 < t < self.duration:
                    pts.add(t)
        return tuple(sorted(pts))

    def pack(self):
        """Flatten to kernel arrays; see :mod:`ion_gate_sim._kernels`."""
        n = len(self.terms)
        d = self.dim
        ops = np.empty((n, d, d), dtype=np.complex128)
        env_kind = np.empty(n, dtype=np.int64)
        env_par = np.zeros((n, 2), dtype=np.float64)
        w0 = np.empty(n, dtype=np.float64)
        phase = np.empty(n, dtype=np.float64)
        trig = np.empty(n, dtype=np.int64)
        w1 = np.empty(n, dtype=np.float64)
        for k, term in enumerate(self.terms):
            ops[k] = term.op
            env_kind[k] = 0 if term.envelope.kind == "const" else 1
            env_par[k, 0] = term.envelope.t_r
            env_par[k, 1] = term.envelope.t_total
            w0[k] = term.osc.w0
            phase[k] = term.osc.phase
            trig[k] = _TRIG_CODE[term.osc.trig]
            w1[k] = term.osc.w1
        ops_dag = np.ascontiguousarray(np.conj(np.transpose(ops, (0, 2, 1))))
        return {
            "ops": ops,
            "ops_dag": ops_dag,
            "ops_flat": np.ascontiguousarray(ops.reshape(n * d, d)),
            "ops_dag_flat": np.ascontiguousarray(ops_dag.reshape(n * d, d)),
            "env_kind": env_kind,
            "env_par": env_par,
            "w0": w0,
            "phase": phase,
            "trig": trig,
            "w1": w1,
        }


# ---------------------------------------------------------------------------
# configurations


@dataclass(frozen=True)
class GateConfig:
    """Physical parameters of the abstract geometric phase gate.

    omega_p: spin-dependent force Rabi frequency (rad/s)
    omega_E: E-field Rabi frequency (rad/s)
    theta:   target rotation angle (rad)
    K:       number of phase-space loops
    phi:     E-field phase relative to the spin-dependent force
    axis:    unit vector defining the gate Pauli operator
    """

    omega_p: float
    omega_E: float
    theta: float
    K: int = 1
    phi: float = 0.0
    axis: tuple = (0.0, 1.0, 0.0)

    def __post_init__(self):
        if self.omega_p <= 0.0:
            raise ValueError("omega_p must be positive")
        if self.omega_E < 0.0:
            raise ValueError("omega_E must be non-negative")
        if self.theta <= 0.0:
            raise ValueError("theta must be positive")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError("K must be a positive integer")
        qops.sigma_axis(self.axis)  # validates unit norm

    @property
    def delta(self) -> float:
        """Gate detuning closing K loops in the gate time (rad/s)."""
        if self.omega_E == 0.0:
            raise ValueError("closure detuning undefined for omega_E = 0")
        return float(np.sqrt(8.0 * np.pi * self.K * self.omega_p * self.omega_E / self.theta))

    @property
    def t_g(self) -> float:
        return TWO_PI * self.K / self.delta

    @property
    def omega_eff(self) -> float:
        """Effective Rabi frequency theta / t_g."""
        return float(np.sqrt(2.0 * self.omega_p * self.omega_E * self.theta / (np.pi * self.K)))

    def sigma(self) -> np.ndarray:
        return qops.sigma_axis(self.axis)

    def target_unitary(self) -> np.ndarray:
        """Ideal spin rotation exp(-i theta sigma_n / 2)."""
        return qops.matrix_exponential(self.sigma(), -0.5j * self.theta)


@dataclass(frozen=True)
class PhysicalDriveConfig:
    """Laser-free microwave drive shared by a target and a spectator zone.

    All frequencies angular (rad/s); the bichromatic detuning is fixed by
    construction to delta = (omega_tau - omega_rf) - Delta.
    """

    omega_mu: float          # microwave Rabi frequency
    omega_g: float           # gradient Rabi frequency
    omega_rf: float          # rf gradient frequency (the paper's omega_g)
    omega_tau: float         # target-zone motional frequency
    omega_spectator: float   # spectator-zone motional frequency
    omega_E_tau: float       # E-field Rabi frequency at the target
    omega_E_spectator: float  # E-field Rabi frequency leaking to the spectator
    Delta: float             # gate detuning
    t_r: float               # ramp duration
    t_plateau: float         # full-amplitude duration
    theta: float = np.pi / 2

    def __post_init__(self):
        if min(self.omega_g, self.omega_rf, self.omega_tau, self.omega_E_tau) <= 0.0:
            raise ValueError("rabi and mode frequencies must be positive")
        if self.t_r < 0.0 or self.t_plateau < 0.0:
            raise ValueError("durations must be non-negative")

    @property
    def delta(self) -> float:
        """Bichromatic microwave detuning (held by construction)."""
        return (self.omega_tau - self.omega_rf) - self.Delta

    @property
    def t_total(self) -> float:
        return self.t_plateau + 2.0 * self.t_r

    @property
    def omega_p_eff(self) -> float:
        """Dressed spin-dependent force Rabi frequency Omega_g J1(4 Omega_mu/delta)."""
        return self.omega_g * float(bessel_j1(4.0 * self.omega_mu / self.delta))

    def mode_frequency(self, zone: str) -> float:
        if zone == "target":
            return self.omega_tau
        if zone == "spectator":
            return self.omega_spectator
        raise ValueError(f"zone must be 'target' or 'spectator', got {zone!r}")

    def omega_E(self, zone: str) -> float:
        return self.omega_E_tau if zone == "target" else self.omega_E_spectator

    def with_spectator(self, omega_spectator=None, e_field_ratio=None) -> "PhysicalDriveConfig":
        kw = {}
        if omega_spectator is not None:
            kw["omega_spectator"] = omega_spectator
        if e_field_ratio is not None:
            kw["omega_E_spectator"] = e_field_ratio * self.omega_E_tau
        return replace(self, **kw)


def drive_from_effective_gate(
    omega_g: float,
    omega_E_tau: float,
    omega_tau: float,
    omega_spectator: float,
    omega_rf: float,
    t_r: float,
    theta: float = np.pi / 2,
    K: int = 1,
    omega_E_spectator: float = 0.0,
    j1_argument: float = J1_PEAK_ARGUMENT,
    t_plateau: float = None,
) -> PhysicalDriveConfig:
    """Build a drive whose effective model closes K loops with angle theta.

    The gate detuning follows from the dressed force Omega_g J1(j1_argument)
    and the closure condition; the microwave Rabi frequency is then set so
    4 Omega_mu / delta equals ``j1_argument`` (default: the J1 maximum). The
    plateau defaults to the flat-top closure time minus one ramp, a good
    initial guess that :func:`ion_gate_sim.addressing.optimize_gate_time`
    refines.
    """
    omega_p_eff = omega_g * float(bessel_j1(j1_argument))
    Delta = float(np.sqrt(8.0 * np.pi * K * omega_p_eff * omega_E_tau / theta))
    delta = (omega_tau - omega_rf) - Delta
    if delta <= 0.0:
        raise ValueError("need omega_tau - omega_rf > Delta for a positive detuning")
    omega_mu = j1_argument * delta / 4.0
    t_flat = TWO_PI * K / Delta
    if t_plateau is None:
        t_plateau = max(t_flat - t_r, 0.0)
    return PhysicalDriveConfig(
        omega_mu=omega_mu,
        omega_g=omega_g,
        omega_rf=omega_rf,
        omega_tau=omega_tau,
        omega_spectator=omega_spectator,
        omega_E_tau=omega_E_tau,
        omega_E_spectator=omega_E_spectator,
        Delta=Delta,
        t_r=t_r,
        t_plateau=t_plateau,
        theta=theta,
    )


# ---------------------------------------------------------------------------
# Hamiltonian builders


def build_ideal_gate_hamiltonian(
    cfg: GateConfig, n_max: int = 20, detuning: float = None, duration: float = None
) -> HamiltonianSchedule:
    """Abstract gate drive: spin-dependent force plus E-field force.

    H(t) = omega_p sigma_n a^dag e^{-i Delta t}
         + omega_E a^dag e^{-i(Delta t + phi)} + h.c.

    Detuning and duration default to the closure values Delta(cfg), t_g(cfg);
    both must be supplied explicitly when omega_E = 0.
    """
    if detuning is None:
        detuning = cfg.delta
    if duration is None:
        duration = TWO_PI * cfg.K / detuning
    ops = qops.build_operators(n_max, 1)
    terms = [
        Term(
            op=cfg.omega_p * ops.spin_motion(cfg.sigma(), qops.create(n_max)),
            osc=Oscillation(w0=-detuning),
        )
    ]
    if cfg.omega_E != 0.0:
        terms.append(
            Term(
                op=cfg.omega_E * ops.motion(qops.create(n_max)),
                osc=Oscillation(w0=-detuning, phase=-cfg.phi),
            )
        )
    return HamiltonianSchedule(tuple(terms), duration, 1, n_max)


def build_microwave_hamiltonian(
    drive: PhysicalDriveConfig, zone: str, n_max: int = 60, duration: float = None
) -> HamiltonianSchedule:
    """Full laser-free drive for one zone, in that zone's rotating frame.

    Terms (with the shared bichromatic field, rf gradient, and E-field):
      2 Omega_mu cos(delta t) sigma_x                    [ramped]
      2 Omega_g  cos(omega_rf t) sigma_z (a^dag e^{i w t} + h.c.)  [ramped]
      2 Omega_E,zone sin((omega_tau - Delta) t) (a^dag e^{i w t} + h.c.)

    where w is the zone's own motional frequency. The E-field has no pulse
    shaping; the microwave and gradient envelopes ramp together.
    """
    if duration is None:
        duration = drive.t_total
    w_mode = drive.mode_frequency(zone)
    omega_E = drive.omega_E(zone)
    ops = qops.build_operators(n_max, 1)
    ad = qops.create(n_max)
    ramp = ramp_envelope(drive.t_r, duration) if drive.t_r > 0.0 else constant_envelope()
    terms = [
        Term(
            op=2.0 * drive.omega_mu * ops.spin(qops.SIGMA_PLUS),
            envelope=ramp,
            osc=Oscillation(trig="cos", w1=drive.delta),
        ),
        Term(
            op=2.0 * drive.omega_g * ops.spin_motion(qops.SIGMA_Z, ad),
            envelope=ramp,
            osc=Oscillation(w0=w_mode, trig="cos", w1=drive.omega_rf),
        ),
    ]
    if omega_E != 0.0:
        terms.append(
            Term(
                op=2.0 * omega_E * ops.motion(ad),
                osc=Oscillation(w0=w_mode, trig="sin", w1=drive.omega_tau - drive.Delta),
            )
        )
    return HamiltonianSchedule(tuple(terms), duration, 1, n_max)


def build_effective_hamiltonian(
    drive: PhysicalDriveConfig, n_max: int = 60, duration: float = None
) -> HamiltonianSchedule:
    """Dressed-frame effective gate for the target zone.

    H(t) = i (Omega_g J1[4 Omega_mu/delta] sigma_y + Omega_E,tau) a^dag
           e^{i Delta t} + h.c.

    Valid once the ramped drive has converged to the dressed frame; the
    rotation sense matches the full microwave model (conjugate to the
    abstract-model convention).
    """
    if drive.delta == 0.0:
        raise ValueError("bichromatic detuning must be nonzero")
    if duration is None:
        duration = TWO_PI / drive.Delta
    ops = qops.build_operators(n_max, 1)
    ad = qops.create(n_max)
    terms = (
        Term(
            op=drive.omega_p_eff * ops.spin_motion(qops.SIGMA_Y, ad),
            osc=Oscillation(w0=drive.Delta, phase=np.pi / 2.0),
        ),
        Term(
            op=drive.omega_E_tau * ops.motion(ad),
            osc=Oscillation(w0=drive.Delta, phase=np.pi / 2.0),
        ),
    )
    return HamiltonianSchedule(terms, duration, 1, n_max)


def build_micromotion_hamiltonian(
    omega_rsb: float, omega_e: float, Delta: float, n_max: int = 20, duration: float = None
) -> HamiltonianSchedule:
    """Red-sideband + E-field drive of the micromotion addressing scheme.

    H(t) = omega_rsb (sigma_- a^dag e^{i Delta t} + h.c.)
         + omega_e (a^dag e^{i Delta t} + h.c.)
    """
    if duration is None:
        duration = TWO_PI / abs(Delta)
    ops = qops.build_operators(n_max, 1)
    ad = qops.create(n_max)
    terms = [
        Term(
            op=omega_rsb * ops.spin_motion(qops.SIGMA_MINUS, ad),
            osc=Oscillation(w0=Delta),
        )
    ]
    if omega_e != 0.0:
        terms.append(Term(op=omega_e * ops.motion(ad), osc=Oscillation(w0=Delta)))
    return HamiltonianSchedule(tuple(terms), duration, 1, n_max)


def build_collective_hamiltonian(
    projections,
    omega_p: float,
    omega_e: float,
    Delta: float,
    n_max: int = 12,
    duration: float = None,
    axis=(0.0, 1.0, 0.0),
    spin_sign: float = 1.0,
) -> HamiltonianSchedule:
    """Multi-ion gate on one shared mode with collective Pauli coupling.

    H(t) = omega_p (spin_sign * S) (a^dag e^{i Delta t} + h.c.)
         + omega_e (a^dag e^{i Delta t} + h.c.),
    S = sum_j e_j sigma_n,j with mode projections e_j normalized so
    max|e_j| = 1 (two-ion examples: center-of-mass (1, 1), stretch (-1, 1)).

    ``Delta`` may be signed; ``spin_sign=-1`` flips S for the spin-echo
    composite segments.
    """
    e = np.asarray(projections, dtype=float)
    n_qubits = e.size
    if np.max(np.abs(e)) == 0.0:
        raise ValueError("projection vector must be nonzero")
    if duration is None:
        duration = TWO_PI / abs(Delta)
    ops = qops.build_operators(n_max, n_qubits)
    ad_full = ops.ad
    S = ops.collective_pauli(axis, e)
    terms = [
        Term(op=omega_p * spin_sign * (S @ ad_full), osc=Oscillation(w0=Delta)),
    ]
    if omega_e != 0.0:
        terms.append(Term(op=omega_e * ad_full, osc=Oscillation(w0=Delta)))
    return HamiltonianSchedule(tuple(terms), duration, n_qubits, n_max)


# ---------------------------------------------------------------------------
# configuration file ingestion

HZ_SUFFIX = "_hz"


def convert_hz_keys(raw: dict) -> dict:
    """Convert '*_hz' cyclic-frequency entries to angular rad/s values.

    ``{"omega_E_hz": 1e5}`` becomes ``{"omega_E": 2*pi*1e5}``; other keys
    pass through unchanged.
    """
    out = {}
    for key, value in raw.items():
        if key.endswith(HZ_SUFFIX):
            out[key[: -len(HZ_SUFFIX)]] = TWO_PI * float(value)
        else:
            out[key] = value
    return out


def load_gate_config(path) -> GateConfig:
    """Read a GateConfig from a JSON file; frequencies given as *_hz cycles."""
    with open(path) as fh:
        raw = json.load(fh)
    allowed = {"omega_p", "omega_E", "theta", "K", "phi", "axis"}
    data = convert_hz_keys(raw)
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown gate config keys: {sorted(unknown)}")
    if "axis" in data:
        data["axis"] = tuple(data["axis"])
    return GateConfig(**data)
