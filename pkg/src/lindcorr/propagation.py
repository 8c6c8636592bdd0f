"""Time evolution and correlator drivers.

The evaluation pattern shared by every driver: evolve a slot tensor with the
appropriate generator, then contract it against the fixed insertion matrices
and the state.  The contraction is carried by a dual vector `w` built once per
(insertions, state) pair, so a tau sweep costs one propagator application and
one dot product per point.
"""

from __future__ import annotations

import bisect
import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .decomposition import decompose_model
from .errors import DegenerateSteadyStateError, NumericsError
from .generators import (
    DEFAULT_SLOT_BUDGET,
    SuperOperator,
    _as_decomps,
    check_slot_budget,
    elementary_tensor,
    forward_lindbladian,
    multi_slot_action,
    multi_slot_generator,
)
from .models import SystemModel
from .operators import as_operator, dagger, expm, identity, is_hermitian, unvec, vec

_DENSITY_ATOL = 1e-10
DEFAULT_ODE_TOL = 1e-10


def _check_density(rho, name: str = "state") -> np.ndarray:
    rho = as_operator(rho, name)
    if not is_hermitian(rho, _DENSITY_ATOL):
        raise ValueError(f"{name} must be Hermitian within {_DENSITY_ATOL:.0e}")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > _DENSITY_ATOL:
        raise ValueError(f"{name} must have unit trace, got {tr:.12g}")
    lo = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
    if lo < -_DENSITY_ATOL:
        raise ValueError(f"{name} must be positive semidefinite, min eigenvalue {lo:.3e}")
    return rho


def _check_taus(taus) -> np.ndarray:
    arr = np.asarray(taus, dtype=float)
    if arr.ndim != 1 or len(arr) == 0:
        raise ValueError("tau grid must be a nonempty 1-d array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("tau grid has non-finite entries")
    if len(arr) > 1 and not np.all(np.diff(arr) > 0):
        raise ValueError("tau grid must be strictly ascending")
    if arr[0] < 0:
        raise ValueError(f"tau grid must be nonnegative, starts at {arr[0]}")
    return arr


@dataclass(frozen=True)
class CorrelatorSpec:
    """Operator insertions at arbitrary times, left-to-right as written.

    ``insertions`` is a sequence of (operator, time) pairs giving the operator
    string of the correlator in positional order; ``initial_state`` is the
    density matrix at time zero.
    """

    insertions: tuple[tuple[np.ndarray, float], ...]
    initial_state: np.ndarray

    def __post_init__(self):
        rho = _check_density(self.initial_state, "initial_state").copy()
        rho.setflags(write=False)
        object.__setattr__(self, "initial_state", rho)
        items = []
        for k, (op, t) in enumerate(self.insertions):
            op = as_operator(op, f"insertion {k}").copy()
            if op.shape != rho.shape:
                raise ValueError(
                    f"insertion {k} has dimension {op.shape[0]}, state has {rho.shape[0]}"
                )
            t = float(t)
            if not (t >= 0 and np.isfinite(t)):
                raise ValueError(f"insertion {k} time must be finite and >= 0, got {t}")
            op.setflags(write=False)
            items.append((op, t))
        if not items:
            raise ValueError("a correlator needs at least one insertion")
        object.__setattr__(self, "insertions", tuple(items))

    @property
    def dim(self) -> int:
        return self.initial_state.shape[0]


@dataclass(frozen=True)
class CorrelatorTrace:
    """Sampled correlator: strictly ascending offsets and one complex value each."""

    taus: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        taus = _check_taus(self.taus).copy()
        values = np.asarray(self.values, dtype=complex).copy()
        if values.shape != taus.shape:
            raise ValueError(f"values shape {values.shape} does not match taus shape {taus.shape}")
        taus.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.taus)


def contraction_functional(a_ops: Sequence[np.ndarray], rho: np.ndarray) -> np.ndarray:
    """Dual vector w with w @ elementary(X1..Xn) = trace(A1 X1 A2 X2 ... An Xn A_{n+1} rho).

    `a_ops` holds the n+1 fixed insertion matrices surrounding n slots.  The
    trace closes through K = A_{n+1} rho A_1, leaving one factor per slot.
    """
    n = len(a_ops) - 1
    if n < 1:
        raise ValueError("contraction needs at least two insertion matrices (one slot)")
    rho = as_operator(rho, "state")
    ops = [as_operator(a, f"insertion matrix {k}") for k, a in enumerate(a_ops)]
    d = rho.shape[0]
    for k, a in enumerate(ops):
        if a.shape != (d, d):
            raise ValueError(f"insertion matrix {k} has dimension {a.shape[0]}, state has {d}")
    letters = string.ascii_lowercase + string.ascii_uppercase
    if 2 * n > len(letters):
        raise ValueError(f"contraction supports at most {len(letters) // 2} slots, got {n}")
    lab = letters[: 2 * n]  # slot m owns (column, row) labels lab[2m-2], lab[2m-1]
    subs, factors = [], []
    for m in range(1, n):
        subs.append(lab[2 * m - 2] + lab[2 * m + 1])  # A_{m+1}[c_m, r_{m+1}]
        factors.append(ops[m])
    subs.append(lab[2 * n - 2] + lab[1])              # K[c_n, r_1]
    factors.append(ops[n] @ rho @ ops[0])
    w = np.einsum(",".join(subs) + "->" + lab, *factors)
    return w.reshape(-1)


def integrate_ode(generator, v0, tau_grid, tol: float = DEFAULT_ODE_TOL) -> list[np.ndarray]:
    """Adaptive Runge-Kutta solution of dv/dtau = G v, sampled on `tau_grid`.

    `generator` may be a dense matrix, a SuperOperator, or any object with an
    ``apply`` method (matrix-free).  `v0` is the value at tau_grid[0].
    """
    if not tol > 0:
        raise ValueError(f"tolerance must be > 0, got {tol}")
    grid = np.asarray(tau_grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise ValueError("tau grid must be a nonempty 1-d array")
    if len(grid) > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("tau grid must be strictly ascending")
    v0 = np.asarray(v0, dtype=complex)
    if len(grid) == 1:
        return [v0.copy()]
    if hasattr(generator, "apply"):
        rhs = lambda _t, y: generator.apply(y)  # noqa: E731
    else:
        mat = np.asarray(generator, dtype=complex)
        rhs = lambda _t, y: mat @ y  # noqa: E731
    sol = solve_ivp(
        rhs,
        (grid[0], grid[-1]),
        v0,
        method="DOP853",
        t_eval=grid,
        rtol=tol,
        atol=tol,
    )
    if not sol.success:
        raise NumericsError(f"ODE integration failed (step underflow?): {sol.message}")
    return [sol.y[:, i].copy() for i in range(sol.y.shape[1])]


class _SlotEvolver:
    """Shared propagator/generator caches for one (hamiltonian, decomps) context."""

    def __init__(self, hamiltonian, decomps, slot_budget: int, ode_tol: float):
        self.h = as_operator(hamiltonian, "hamiltonian")
        self.decomps = _as_decomps(decomps)
        if self.decomps[0].dim != self.h.shape[0]:
            raise ValueError(
                f"decomposition dimension {self.decomps[0].dim} does not match "
                f"hamiltonian dimension {self.h.shape[0]}"
            )
        self.dim = self.h.shape[0]
        self.slot_budget = slot_budget
        self.ode_tol = ode_tol
        self._generators: dict[int, object] = {}
        self._propagators: dict[tuple[int, float], np.ndarray] = {}

    def dense(self, n_slots: int) -> bool:
        return self.dim ** (2 * n_slots) <= self.slot_budget

    def generator(self, n_slots: int):
        gen = self._generators.get(n_slots)
        if gen is None:
            if self.dense(n_slots):
                gen = multi_slot_generator(self.h, self.decomps, n_slots, self.slot_budget)
            else:
                # matrix-free fallback; the state vector itself must still fit
                check_slot_budget(self.dim, n_slots, self.slot_budget ** 2)
                gen = multi_slot_action(self.h, self.decomps, n_slots)
            self._generators[n_slots] = gen
        return gen

    def evolve(self, tensor: np.ndarray, n_slots: int, gap: float) -> np.ndarray:
        if gap == 0.0:
            return tensor
        gen = self.generator(n_slots)
        if isinstance(gen, SuperOperator):
            prop = self._propagators.get((n_slots, gap))
            if prop is None:
                prop = expm(gen.matrix, gap)
                self._propagators[(n_slots, gap)] = prop
            return prop @ tensor
        return integrate_ode(gen, tensor, [0.0, gap], self.ode_tol)[-1]

    def sweep(self, tensor: np.ndarray, n_slots: int, taus: np.ndarray,
              w: np.ndarray) -> np.ndarray:
        """Values w @ T(tau) along an ascending grid, stepping gap by gap."""
        gen = self.generator(n_slots)
        values = np.empty(len(taus), dtype=complex)
        if isinstance(gen, SuperOperator):
            v, cur = tensor, 0.0
            for i, tau in enumerate(taus):
                v = self.evolve(v, n_slots, float(tau) - cur)
                cur = float(tau)
                values[i] = w @ v
        else:
            grid = taus if taus[0] == 0.0 else np.concatenate(([0.0], taus))
            states = integrate_ode(gen, tensor, grid, self.ode_tol)
            if taus[0] != 0.0:
                states = states[1:]
            for i, v in enumerate(states):
                values[i] = w @ v
        return values


def evolve_density(hamiltonian, decomp, rho0, t: float) -> np.ndarray:
    """Forward evolution rho(t) of a density matrix under the dissipative generator."""
    if t < 0:
        raise ValueError(f"evolution time must be >= 0, got {t}")
    rho0 = _check_density(rho0, "rho0")
    f = forward_lindbladian(hamiltonian, decomp)
    if rho0.shape[0] != f.dim:
        raise ValueError(f"state dimension {rho0.shape[0]} does not match generator dimension {f.dim}")
    rho = unvec(expm(f.matrix, float(t)) @ vec(rho0))
    rho = 0.5 * (rho + rho.conj().T)
    tr = float(np.trace(rho).real)
    drift = abs(tr - 1.0)
    if drift > 1e-8:
        raise NumericsError(f"trace drift {drift:.3e} after evolution exceeds 1e-8")
    if drift > 1e-12:
        rho = rho / tr
    return rho


def steady_state(model: SystemModel, decomp=None, null_tol: float = 1e-9) -> np.ndarray:
    """Unique trace-one stationary state of the forward generator.

    Raises DegenerateSteadyStateError when the null space is not
    one-dimensional (e.g. any rate-free model), reporting the multiplicity.
    """
    decomps = decompose_model(model) if decomp is None else _as_decomps(decomp)
    f = forward_lindbladian(model.hamiltonian, decomps)
    _u, s, vh = np.linalg.svd(f.matrix)
    if s[0] == 0.0:
        raise DegenerateSteadyStateError(multiplicity=len(s))
    nullity = int(np.sum(s <= null_tol * s[0]))
    if nullity != 1:
        raise DegenerateSteadyStateError(multiplicity=nullity)
    rho = unvec(vh[-1].conj())
    rho = 0.5 * (rho + rho.conj().T)
    tr = float(np.trace(rho).real)
    if abs(tr) < 1e-10 * np.linalg.norm(rho):
        raise NumericsError("steady-state candidate is traceless; cannot normalize")
    return rho / tr


def qrt_correlator(hamiltonian, decomp, a1, b, a2, rho_t, taus,
                   slot_budget: int = DEFAULT_SLOT_BUDGET,
                   ode_tol: float = DEFAULT_ODE_TOL) -> CorrelatorTrace:
    """Regression-theorem correlator trace(A1 B(t+tau) A2 rho(t)).

    The running-time operator B evolves under the adjoint generator while A1,
    A2 and the state rho_t (the density matrix at the anchor time t) stay
    fixed; value(0) = trace(B A2 rho_t A1).
    """
    taus = _check_taus(taus)
    rho_t = _check_density(rho_t, "rho_t")
    b = as_operator(b, "running operator B")
    ev = _SlotEvolver(hamiltonian, decomp, slot_budget, ode_tol)
    for name, op in (("A1", a1), ("B", b), ("A2", a2), ("rho_t", rho_t)):
        op = as_operator(op, name)
        if op.shape[0] != ev.dim:
            raise ValueError(f"{name} has dimension {op.shape[0]}, generator has {ev.dim}")
    w = contraction_functional([a1, a2], rho_t)
    values = ev.sweep(vec(b), 1, taus, w)
    return CorrelatorTrace(taus, values)


def equal_time_group_correlator(hamiltonian, decomp, a_ops, b_ops, rho_t, taus,
                                slot_budget: int = DEFAULT_SLOT_BUDGET,
                                ode_tol: float = DEFAULT_ODE_TOL) -> CorrelatorTrace:
    """Correlator with n operators sharing one running time:
    trace(A1 B1(t+tau) A2 B2(t+tau) ... An Bn(t+tau) A_{n+1} rho(t)).

    The B string evolves as one n-slot tensor under the full generator
    (single-slot terms plus cross dissipators); the A matrices and the state
    enter only through the contraction.
    """
    b_ops = [as_operator(b, f"slot operator {k+1}") for k, b in enumerate(b_ops)]
    a_ops = [as_operator(a, f"insertion matrix {k+1}") for k, a in enumerate(a_ops)]
    n = len(b_ops)
    if n < 1:
        raise ValueError("need at least one running-time operator")
    if len(a_ops) != n + 1:
        raise ValueError(f"expected {n + 1} insertion matrices for {n} slots, got {len(a_ops)}")
    taus = _check_taus(taus)
    rho_t = _check_density(rho_t, "rho_t")
    ev = _SlotEvolver(hamiltonian, decomp, slot_budget, ode_tol)
    for op in (*b_ops, *a_ops, rho_t):
        if op.shape[0] != ev.dim:
            raise ValueError(f"operator dimension {op.shape[0]} does not match generator dimension {ev.dim}")
    w = contraction_functional(a_ops, rho_t)
    values = ev.sweep(elementary_tensor(b_ops), n, taus, w)
    return CorrelatorTrace(taus, values)


def otoc(hamiltonian, decomp, w_op, v_op, rho, taus,
         slot_budget: int = DEFAULT_SLOT_BUDGET,
         ode_tol: float = DEFAULT_ODE_TOL) -> CorrelatorTrace:
    """Out-of-time-order correlator trace(W^dag(tau) V^dag W(tau) V rho)."""
    w_op = as_operator(w_op, "W")
    v_op = as_operator(v_op, "V")
    eye = identity(w_op.shape[0])
    return equal_time_group_correlator(
        hamiltonian, decomp,
        a_ops=[eye, dagger(v_op), v_op],
        b_ops=[dagger(w_op), w_op],
        rho_t=rho,
        taus=taus,
        slot_budget=slot_budget,
        ode_tol=ode_tol,
    )


def _splice_slot(tensor: np.ndarray, d2: int, n_before: int, pos: int,
                 vec_op: np.ndarray) -> np.ndarray:
    """Insert vec_op as a new Kronecker factor at slot position `pos` (0-based)."""
    t = tensor.reshape((d2,) * n_before)
    t = np.moveaxis(np.tensordot(t, vec_op, axes=0), -1, pos)
    return t.reshape(-1)


def _general_value(ev: _SlotEvolver, spec: CorrelatorSpec) -> complex:
    times = [t for _op, t in spec.insertions]
    distinct = sorted(set(times), reverse=True)
    d2 = ev.dim ** 2

    slots = [i for i, t in enumerate(times) if t == distinct[0]]
    tensor = elementary_tensor([spec.insertions[i][0] for i in slots])
    for k in range(len(distinct) - 1):
        s_hi, s_lo = distinct[k], distinct[k + 1]
        # growing the slot list may push past the dense budget mid-recursion;
        # generator() revalidates at every depth
        tensor = ev.evolve(tensor, len(slots), s_hi - s_lo)
        for i, t in enumerate(times):
            if t == s_lo:
                pos = bisect.bisect_left(slots, i)
                tensor = _splice_slot(tensor, d2, len(slots), pos, vec(spec.insertions[i][0]))
                slots.insert(pos, i)
    rho_anchor = evolve_density(ev.h, ev.decomps, spec.initial_state, distinct[-1])
    eye = identity(ev.dim)
    w = contraction_functional([eye] * (len(slots) + 1), rho_anchor)
    return complex(w @ tensor)


def general_correlator(hamiltonian, decomp, spec: CorrelatorSpec, taus=None,
                       slot_budget: int = DEFAULT_SLOT_BUDGET,
                       ode_tol: float = DEFAULT_ODE_TOL):
    """Correlator with arbitrary per-insertion times, by descending-time recursion.

    Insertions sharing the latest time start as slots of one tensor; the
    tensor evolves down to the next-latest time, where the insertions
    scheduled there splice in as new slots at their positions in the operator
    string; at the earliest time the tensor contracts against the forward-
    evolved state.  Equal-time groups therefore reduce to
    :func:`equal_time_group_correlator` and two insertions to the regression
    cascade.

    With `taus` given, the insertions holding the latest time are swept: their
    time is replaced by each tau (every tau must be >= all other insertion
    times), and a CorrelatorTrace is returned instead of a single value.
    """
    ev = _SlotEvolver(hamiltonian, decomp, slot_budget, ode_tol)
    if spec.dim != ev.dim:
        raise ValueError(f"spec dimension {spec.dim} does not match generator dimension {ev.dim}")
    # fail fast if even the deepest level cannot fit
    check_slot_budget(ev.dim, len(spec.insertions), ev.slot_budget ** 2)
    if taus is None:
        return _general_value(ev, spec)

    taus = _check_taus(taus)
    times = [t for _op, t in spec.insertions]
    t_max = max(times)
    swept = [i for i, t in enumerate(times) if t == t_max]
    floor = max((t for t in times if t != t_max), default=0.0)
    if taus[0] < floor:
        raise ValueError(
            f"sweep times must not precede the fixed insertion times: "
            f"tau={taus[0]} < {floor}"
        )
    values = np.empty(len(taus), dtype=complex)
    for k, tau in enumerate(taus):
        moved = tuple(
            (op, float(tau) if i in swept else t)
            for i, (op, t) in enumerate(spec.insertions)
        )
        values[k] = _general_value(ev, CorrelatorSpec(moved, spec.initial_state))
    return CorrelatorTrace(taus, values)
