"""Independent brute-force references.

Nothing here touches the superoperator machinery: closed-system correlators
use plain spectral calculus, the finite-bath simulator diagonalizes the full
system-plus-reservoir Hamiltonian, and the naive integrator steps the
evolution equation termwise with matrix products on slot axes.  That
independence is the point — these are the yardsticks the fast paths are
measured against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .decomposition import JumpDecomposition
from .models import SystemModel
from .operators import as_operator, hermitian_eig, identity
from .propagation import CorrelatorSpec

DEFAULT_DIM_CAP = 4096


@dataclass(frozen=True)
class FiniteBath:
    """A discrete reservoir: one register of bosonic modes, thermal at `temperature`.

    `levels` = 2 gives qubit modes (hardcap on dimension growth); larger
    values give truncated-oscillator modes.  Couplings are the g_k in the
    interaction S (x) sum_k g_k (b_k + b_k^dag).
    """

    mode_frequencies: tuple[float, ...]
    mode_couplings: tuple[float, ...]
    levels: int = 2
    temperature: float = 0.0

    def __post_init__(self):
        freqs = tuple(float(w) for w in self.mode_frequencies)
        coups = tuple(float(g) for g in self.mode_couplings)
        if len(freqs) == 0:
            raise ValueError("a finite bath needs at least one mode")
        if len(freqs) != len(coups):
            raise ValueError(
                f"got {len(freqs)} mode frequencies but {len(coups)} couplings"
            )
        if any(w <= 0 for w in freqs):
            raise ValueError("mode frequencies must be positive")
        if self.levels < 2:
            raise ValueError(f"mode levels must be >= 2, got {self.levels}")
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        object.__setattr__(self, "mode_frequencies", freqs)
        object.__setattr__(self, "mode_couplings", coups)

    @property
    def mode_count(self) -> int:
        return len(self.mode_frequencies)


def golden_rule_band(omega0: float, rate: float, n_modes: int = 8,
                     half_width: float | None = None, temperature: float = 0.0,
                     levels: int = 2) -> FiniteBath:
    """Equally spaced band around omega0 whose golden-rule decay rate is `rate`.

    Mode spacing dw = 2*half_width/(n_modes-1) and flat couplings
    g = sqrt(rate*dw/(2*pi)); the discrete dynamics then tracks the continuum
    up to the recurrence time 2*pi/dw.
    """
    if n_modes < 2:
        raise ValueError(f"a band needs at least 2 modes, got {n_modes}")
    if rate <= 0:
        raise ValueError(f"target rate must be > 0, got {rate}")
    if half_width is None:
        half_width = 5.0 * rate
    if not 0 < half_width < omega0:
        raise ValueError(
            f"band half-width must lie in (0, omega0), got {half_width} at omega0={omega0}"
        )
    freqs = np.linspace(omega0 - half_width, omega0 + half_width, n_modes)
    spacing = 2.0 * half_width / (n_modes - 1)
    g = math.sqrt(rate * spacing / (2.0 * math.pi))
    return FiniteBath(
        mode_frequencies=tuple(freqs),
        mode_couplings=(g,) * n_modes,
        levels=levels,
        temperature=temperature,
    )


def _heisenberg_factory(hamiltonian: np.ndarray):
    """Returns op, t -> e^{+iHt} op e^{-iHt} via one spectral decomposition."""
    energies, u = hermitian_eig(hamiltonian)
    ud = u.conj().T

    def heisenberg(op: np.ndarray, t: float) -> np.ndarray:
        m = ud @ op @ u
        phase = np.exp(1j * energies * t)
        return u @ (np.outer(phase, phase.conj()) * m) @ ud

    return heisenberg


def closed_correlator(hamiltonian, spec: CorrelatorSpec) -> complex:
    """Exact correlator of the isolated system: trace of the product of
    Heisenberg-evolved insertions against the initial state."""
    h = as_operator(hamiltonian, "hamiltonian")
    if h.shape[0] != spec.dim:
        raise ValueError(f"hamiltonian dimension {h.shape[0]} does not match spec dimension {spec.dim}")
    heisenberg = _heisenberg_factory(h)
    prod = identity(spec.dim)
    for op, t in spec.insertions:
        prod = prod @ heisenberg(op, t)
    return complex(np.trace(prod @ spec.initial_state))


def _thermal_mode(omega: float, levels: int, temperature: float) -> np.ndarray:
    if temperature == 0.0:
        p = np.zeros(levels)
        p[0] = 1.0
    else:
        p = np.exp(-omega * np.arange(levels) / temperature)
        p = p / p.sum()
    return np.diag(p).astype(complex)


def _normalize_baths(model: SystemModel, baths) -> list[FiniteBath]:
    if isinstance(baths, FiniteBath):
        baths = [baths]
    baths = list(baths)
    if len(baths) != len(model.couplings):
        raise ValueError(
            f"need one FiniteBath per coupling: model has {len(model.couplings)}, got {len(baths)}"
        )
    return baths


def finite_bath_correlators(model: SystemModel, baths, specs,
                            dim_cap: int = DEFAULT_DIM_CAP) -> list[complex]:
    """Exact correlators against a system + discrete-reservoir Hamiltonian.

    Each coupling of `model` gets its own mode register (reservoirs are
    independent); the full Hamiltonian is diagonalized once and shared by all
    `specs`, whose initial states are system states (the bath always starts
    thermal and factorized).
    """
    baths = _normalize_baths(model, baths)
    specs = list(specs)
    d = model.dim

    mode_dims: list[int] = []
    registry: list[list[int]] = []  # per coupling, indices into the mode register
    for b in baths:
        start = len(mode_dims)
        mode_dims.extend([b.levels] * b.mode_count)
        registry.append(list(range(start, start + b.mode_count)))
    total = d * int(np.prod(mode_dims, dtype=object))
    if total > dim_cap:
        raise ValueError(f"finite-bath dimension {total} exceeds cap {dim_cap}")

    def bath_embed(k: int, op: np.ndarray) -> np.ndarray:
        mats = [identity(dm) for dm in mode_dims]
        mats[k] = op
        return reduce(np.kron, mats)

    bath_dim = total // d
    h_bath = np.zeros((bath_dim, bath_dim), dtype=complex)
    coupling_fields = []
    rho_bath = None
    mode_idx = 0
    for b in baths:
        lower = np.diag(np.sqrt(np.arange(1.0, b.levels)), k=1).astype(complex)
        number = lower.conj().T @ lower
        quadrature = lower + lower.conj().T
        field = np.zeros((bath_dim, bath_dim), dtype=complex)
        for w, g in zip(b.mode_frequencies, b.mode_couplings):
            h_bath += w * bath_embed(mode_idx, number)
            field += g * bath_embed(mode_idx, quadrature)
            therm = _thermal_mode(w, b.levels, b.temperature)
            rho_bath = therm if rho_bath is None else np.kron(rho_bath, therm)
            mode_idx += 1
        coupling_fields.append(field)

    eye_b = identity(bath_dim)
    eye_s = identity(d)
    h_full = np.kron(model.hamiltonian, eye_b) + np.kron(eye_s, h_bath)
    for c, field in zip(model.couplings, coupling_fields):
        h_full += np.kron(c.operator, field)

    energies, u = hermitian_eig(h_full)
    ud = u.conj().T

    # cache the eigenbasis image of each distinct system insertion
    m_cache: dict[bytes, np.ndarray] = {}

    def eig_op(op: np.ndarray) -> np.ndarray:
        key = op.tobytes()
        m = m_cache.get(key)
        if m is None:
            m = ud @ np.kron(op, eye_b) @ u
            m_cache[key] = m
        return m

    values = []
    for spec in specs:
        if spec.dim != d:
            raise ValueError(f"spec dimension {spec.dim} does not match model dimension {d}")
        rho_eig = ud @ np.kron(spec.initial_state, rho_bath) @ u
        prod = None
        for op, t in spec.insertions:
            phase = np.exp(1j * energies * t)
            term = np.outer(phase, phase.conj()) * eig_op(op)
            prod = term if prod is None else prod @ term
        values.append(complex(np.trace(prod @ rho_eig)))
    return values


def finite_bath_correlator(model: SystemModel, bath, spec: CorrelatorSpec,
                           dim_cap: int = DEFAULT_DIM_CAP) -> complex:
    """Single-spec convenience wrapper around :func:`finite_bath_correlators`."""
    return finite_bath_correlators(model, bath, [spec], dim_cap)[0]


# --- naive termwise integrator -------------------------------------------------

def _lmul(m: np.ndarray, x: np.ndarray, slot: int) -> np.ndarray:
    # matrix product on the row axis of slot `slot` (1-based)
    ax = 2 * (slot - 1)
    return np.moveaxis(np.tensordot(m, x, axes=(1, ax)), 0, ax)


def _rmul(m: np.ndarray, x: np.ndarray, slot: int) -> np.ndarray:
    # matrix product on the column axis of slot `slot`
    ax = 2 * (slot - 1) + 1
    return np.moveaxis(np.tensordot(x, m, axes=(ax, 0)), -1, ax)


def naive_equation_integrator(model: SystemModel, decomp, b_ops, a_ops, rho_t,
                              tau_end: float, h: float) -> complex:
    """First-order Euler reference for the equal-time evolution equation.

    The n-slot state is kept as a (d, d, ..., d, d) array, one matrix-index
    pair per slot, and every term of the evolution equation is applied as a
    plain matrix product on the relevant slot axes: the commutator with the
    Hamiltonian and the dissipators slot by slot, and for every slot pair the
    rate-weighted left/right commutators with each channel operator.  O(h)
    accurate by construction; deliberately free of any vectorization.
    """
    if h <= 0:
        raise ValueError(f"step must be > 0, got {h}")
    if tau_end < 0:
        raise ValueError(f"tau_end must be >= 0, got {tau_end}")

    decomps = [decomp] if isinstance(decomp, JumpDecomposition) else list(decomp)
    ham = model.hamiltonian
    b_ops = [as_operator(b, "slot operator") for b in b_ops]
    a_ops = [as_operator(a, "insertion matrix") for a in a_ops]
    rho_t = as_operator(rho_t, "rho_t")
    n = len(b_ops)
    if len(a_ops) != n + 1:
        raise ValueError(f"expected {n + 1} insertion matrices for {n} slots, got {len(a_ops)}")

    ops = []
    for dec in decomps:
        if not dec.rates_assigned:
            raise ValueError("decomposition has unassigned rates; call assign_rates first")
        if dec.gamma0:
            ops.append((dec.gamma0, dec.c0))
        for m in dec.modes:
            if m.gamma_down:
                ops.append((m.gamma_down, m.operator))
            if m.gamma_up:
                ops.append((m.gamma_up, m.operator.conj().T))
    channels = [(rate, c, c.conj().T, c.conj().T @ c) for rate, c in ops]

    x = b_ops[0]
    for b in b_ops[1:]:
        x = np.tensordot(x, b, axes=0)

    def derivative(state: np.ndarray) -> np.ndarray:
        out = np.zeros_like(state)
        for slot in range(1, n + 1):
            out += 1j * (_lmul(ham, state, slot) - _rmul(ham, state, slot))
            for rate, c, cd, cdc in channels:
                sandwich = _rmul(c, _lmul(cd, state, slot), slot)
                out += rate * (sandwich - 0.5 * _lmul(cdc, state, slot) - 0.5 * _rmul(cdc, state, slot))
        for s1 in range(1, n + 1):
            for s2 in range(s1 + 1, n + 1):
                for rate, c, cd, _cdc in channels:
                    left = _lmul(cd, state, s1) - _rmul(cd, state, s1)
                    out += rate * (_rmul(c, left, s2) - _lmul(c, left, s2))
        return out

    remaining = tau_end
    while remaining > h * 1e-12:
        step = min(h, remaining)
        x = x + step * derivative(x)
        remaining -= step

    # closing trace: A1 X1 A2 X2 ... A_{n+1} rho, summed over all slot axes
    letters = "abcdefghijklmnopqrstuvwxyz"
    slot_labels = letters[: 2 * n]
    subs = [letters[2 * n] + slot_labels[0]]           # A1[p, i1]
    factors: list[np.ndarray] = [a_ops[0]]
    subs.append(slot_labels)                            # X[i1, j1, ..., in, jn]
    factors.append(x)
    for m in range(1, n):
        subs.append(slot_labels[2 * m - 1] + slot_labels[2 * m])  # A_{m+1}[j_m, i_{m+1}]
        factors.append(a_ops[m])
    subs.append(slot_labels[2 * n - 1] + letters[2 * n + 1])      # A_{n+1}[j_n, q]
    factors.append(a_ops[n])
    subs.append(letters[2 * n + 1] + letters[2 * n])              # rho[q, p]
    factors.append(rho_t)
    return complex(np.einsum(",".join(subs) + "->", *factors))
