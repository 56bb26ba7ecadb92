"""Operators and states on the truncated cavity (x) two-level-atom space.

Basis ordering is fixed globally as cavity (x) atom, so the composite index of
``|n, s>`` is ``2 * n + s`` with atom index ``0 = |->`` (ground) and
``1 = |+>`` (excited).  All rates are measured in units of the cavity field
decay rate kappa, which is 1 unless stated otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import DimensionError

MAX_DIM = 4096
ATOM_GROUND = 0
ATOM_EXCITED = 1


@dataclass(frozen=True)
class FockTruncation:
    """Photon-number cutoff of the cavity mode."""

    n_max: int = 14

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def cavity_dim(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        """Composite Hilbert-space dimension 2 (n_max + 1)."""
        return 2 * (self.n_max + 1)


@dataclass(frozen=True)
class SystemParams:
    """Rates and drive settings of the driven JC source in the drive frame.

    Every field is stored as an absolute rate in units of ``kappa``; use
    :meth:`from_ratios` to build from the ratio parameterisation
    (g/kappa, eps_d/g, delta_omega_d/g).
    """

    g: float
    eps_d: float = 0.0
    delta_omega_d: float = 0.0
    gamma: float = 0.0
    kappa: float = 1.0
    trunc: FockTruncation = field(default_factory=FockTruncation)

    def __post_init__(self):
        for name in ("g", "eps_d", "delta_omega_d", "gamma", "kappa"):
            val = getattr(self, name)
            if not np.isfinite(val):
                raise ValueError(f"{name} must be finite, got {val!r}")
            object.__setattr__(self, name, float(val))
        if self.g <= 0:
            raise ValueError(f"g must be positive, got {self.g}")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if isinstance(self.trunc, int):
            object.__setattr__(self, "trunc", FockTruncation(self.trunc))

    @classmethod
    def from_ratios(
        cls,
        g_over_kappa: float,
        eps_over_g: float = 0.0,
        detuning_over_g: float = 0.0,
        gamma_over_kappa: float = 0.0,
        n_max: int = 14,
    ) -> "SystemParams":
        g = float(g_over_kappa)
        return cls(
            g=g,
            eps_d=eps_over_g * g,
            delta_omega_d=detuning_over_g * g,
            gamma=gamma_over_kappa,
            kappa=1.0,
            trunc=FockTruncation(n_max),
        )

    @property
    def n_max(self) -> int:
        return self.trunc.n_max

    @property
    def dim(self) -> int:
        return self.trunc.dim

    @property
    def eps_over_g(self) -> float:
        return self.eps_d / self.g

    @property
    def detuning_over_g(self) -> float:
        return self.delta_omega_d / self.g

    def replace(self, **changes) -> "SystemParams":
        from dataclasses import replace

        return replace(self, **changes)

    def as_dict(self) -> dict:
        """Unit-tagged parameter record for provenance headers."""
        return {
            "g": self.g,
            "kappa": self.kappa,
            "gamma": self.gamma,
            "eps_d": self.eps_d,
            "delta_omega_d": self.delta_omega_d,
            "n_max": self.n_max,
            "units": "kappa",
            "g_over_kappa": self.g / self.kappa,
            "eps_over_g": self.eps_over_g,
            "detuning_over_g": self.detuning_over_g,
        }


def annihilation(trunc: FockTruncation | int) -> np.ndarray:
    """Cavity ladder operator with ``a[n-1, n] = sqrt(n)``."""
    n_max = trunc.n_max if isinstance(trunc, FockTruncation) else int(trunc)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1).astype(complex)


def sigma_minus() -> np.ndarray:
    """Atomic lowering operator ``|-><+|``."""
    s = np.zeros((2, 2), dtype=complex)
    s[ATOM_GROUND, ATOM_EXCITED] = 1.0
    return s


def tensor(left: np.ndarray, right: np.ndarray, max_dim: int = MAX_DIM) -> np.ndarray:
    """Kronecker product ``left (x) right`` (cavity on the left)."""
    left = np.asarray(left)
    right = np.asarray(right)
    for m in (left, right):
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"tensor expects square matrices, got shape {m.shape}")
    d = left.shape[0] * right.shape[0]
    if d > max_dim:
        raise DimensionError(f"product dimension {d} exceeds limit {max_dim}")
    return np.kron(left, right)


@dataclass(frozen=True)
class JCOperators:
    """Composite-space operators built once per truncation."""

    trunc: FockTruncation
    a: np.ndarray
    sm: np.ndarray
    n: np.ndarray
    sp_sm: np.ndarray
    identity: np.ndarray

    @property
    def ad(self) -> np.ndarray:
        return self.a.conj().T

    @property
    def sp(self) -> np.ndarray:
        return self.sm.conj().T

    @property
    def dim(self) -> int:
        return self.trunc.dim

    def quadrature(self, theta: float) -> np.ndarray:
        """``A_theta = (a e^{-i theta} + a^dag e^{i theta}) / 2``."""
        q = self.a * np.exp(-1j * theta)
        return 0.5 * (q + q.conj().T)


@lru_cache(maxsize=32)
def jc_operators(trunc: FockTruncation | int) -> JCOperators:
    if isinstance(trunc, int):
        trunc = FockTruncation(trunc)
    a = tensor(annihilation(trunc), np.eye(2))
    sm = tensor(np.eye(trunc.cavity_dim), sigma_minus())
    ops = JCOperators(
        trunc=trunc,
        a=a,
        sm=sm,
        n=a.conj().T @ a,
        sp_sm=sm.conj().T @ sm,
        identity=np.eye(trunc.dim, dtype=complex),
    )
    for arr in (ops.a, ops.sm, ops.n, ops.sp_sm, ops.identity):
        arr.setflags(write=False)
    return ops


def expectation(op: np.ndarray, state: np.ndarray) -> complex:
    """``<psi|op|psi>`` for a vector or ``tr(op rho)`` for a matrix."""
    op = np.asarray(op)
    state = np.asarray(state)
    d = op.shape[0]
    if op.shape != (d, d):
        raise DimensionError(f"operator must be square, got {op.shape}")
    if state.ndim == 1:
        if state.shape[0] != d:
            raise DimensionError(f"state dim {state.shape[0]} != operator dim {d}")
        return complex(np.vdot(state, op @ state))
    if state.shape != (d, d):
        raise DimensionError(f"density operator shape {state.shape} != ({d}, {d})")
    return complex(np.einsum("ij,ji->", op, state))


def partial_trace_atom(rho: np.ndarray) -> np.ndarray:
    """Trace out the two-level atom, leaving the cavity density operator."""
    rho = np.asarray(rho)
    d = rho.shape[0]
    if rho.ndim != 2 or rho.shape[1] != d or d % 2:
        raise DimensionError(f"composite density operator expected, got shape {rho.shape}")
    nc = d // 2
    return np.einsum("iaja->ij", rho.reshape(nc, 2, nc, 2))


def atom_block(rho: np.ndarray, atom: int) -> np.ndarray:
    """Cavity block ``<s|rho|s>`` for atom state ``s`` (0 = minus, 1 = plus)."""
    rho = np.asarray(rho)
    d = rho.shape[0]
    if d % 2:
        raise DimensionError("composite dimension must be even")
    nc = d // 2
    return rho.reshape(nc, 2, nc, 2)[:, atom, :, atom].copy()


def basis_state(trunc: FockTruncation | int, n: int, atom: int | str = "-") -> np.ndarray:
    """Product state ``|n, s>``; ``atom`` accepts 0/1 or '-'/'+'."""
    if isinstance(trunc, int):
        trunc = FockTruncation(trunc)
    s = _atom_index(atom)
    if not 0 <= n <= trunc.n_max:
        raise ValueError(f"photon number {n} outside truncation 0..{trunc.n_max}")
    psi = np.zeros(trunc.dim, dtype=complex)
    psi[2 * n + s] = 1.0
    return psi


def coherent_cavity(alpha: complex, n_max: int) -> np.ndarray:
    """Truncated coherent state on the cavity factor, renormalised."""
    n = np.arange(n_max + 1)
    logmag = n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1) if alpha != 0 else None
    if logmag is None:
        c = np.zeros(n_max + 1, dtype=complex)
        c[0] = 1.0
        return c
    c = np.exp(logmag - 0.5 * abs(alpha) ** 2) * np.exp(1j * n * np.angle(alpha))
    return c / np.linalg.norm(c)


def coherent_state(trunc: FockTruncation | int, alpha: complex, atom: int | str = "-") -> np.ndarray:
    """``|alpha> (x) |s>`` in the composite basis."""
    if isinstance(trunc, int):
        trunc = FockTruncation(trunc)
    atom_vec = np.zeros(2, dtype=complex)
    atom_vec[_atom_index(atom)] = 1.0
    return np.kron(coherent_cavity(alpha, trunc.n_max), atom_vec)


def parse_state_spec(spec: str, trunc: FockTruncation) -> np.ndarray:
    """Parse ``"n,-"`` / ``"n,+"`` into a composite basis vector."""
    try:
        n_txt, s_txt = (part.strip() for part in spec.split(","))
        return basis_state(trunc, int(n_txt), s_txt)
    except (ValueError, TypeError) as exc:
        raise ValueError(f"cannot parse state specifier {spec!r}; expected 'n,-' or 'n,+'") from exc


def check_density(rho: np.ndarray, tol: float = 1e-10, psd_tol: float = 1e-8) -> None:
    """Raise ``ValueError`` unless rho is Hermitian, unit trace and PSD."""
    rho = np.asarray(rho)
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol:
        raise ValueError(f"density operator not Hermitian (deviation {herm:.2e})")
    tr = np.trace(rho).real
    if abs(tr - 1) > tol:
        raise ValueError(f"density operator trace {tr!r} != 1")
    lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lo < -psd_tol:
        raise ValueError(f"density operator has negative eigenvalue {lo:.2e}")


def _atom_index(atom: int | str) -> int:
    if atom in ("-", 0, "g"):
        return ATOM_GROUND
    if atom in ("+", 1, "e"):
        return ATOM_EXCITED
    raise ValueError(f"atom state must be '-' or '+', got {atom!r}")


__all__ = [
    "FockTruncation",
    "SystemParams",
    "JCOperators",
    "annihilation",
    "sigma_minus",
    "tensor",
    "jc_operators",
    "expectation",
    "partial_trace_atom",
    "atom_block",
    "basis_state",
    "coherent_cavity",
    "coherent_state",
    "parse_state_spec",
    "check_density",
]
