"""Collective bases and Hamiltonian terms for a driven multi-level ensemble.

Levels per atom: the ground state "g", storage sublevels "q", "q+", "q-",
and the strongly interacting manifold "r", "r+", "r-", "p'", "p''".  Two
basis modes are supported:

* symmetric: permutation-symmetric states labelled by level occupations.
  Transition amplitudes carry the exact bosonized enhancement
  sqrt(n_from (n_to + 1)), so a drive of single-atom Rabi frequency omega
  couples the ground state to the singly-excited symmetric state with
  matrix element sqrt(N) omega / 2.
* pair-resolved: literal per-atom level assignments (small N only), used
  as the brute-force reference for the symmetric mode.

Pair excitation transfer (r, r) -> (p', p'') is the blockade mechanism:
doubly-excited states hybridize with the transfer-pair states and split.
In symmetric mode each channel of excited levels (A, B) gets its own
bosonic pair quasi-mode "P[A,B]" occupying two atoms and counting as two
excitations; requesting levels p'/p'' creates these modes.  Channel-labeled
modes keep distinct doubly-excited species from mixing resonantly through
a shared intermediate.  Two splitting conventions set the effective
coupling, differing by the documented factor SPLITTING_CONVENTION_RATIO:

* "split":  |r^2> <-> |P[r,r]> element kappa_bar/2, so the hybridized
  eigenstate pair is split by exactly kappa_bar.
* "eq1":    element sqrt(2) kappa_bar, the exact symmetric-subspace
  projection of the literal pair-resolved hopping with uniform couplings
  (eigenstates at +-sqrt(2) kappa_bar).

Cross channels such as r+ r- use the same calibrated element as the
same-level channel under either convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import comb, sqrt

import numpy as np
import scipy.sparse as sparse

GROUND = "g"
LEVEL_ORDER = ("q", "q+", "q-", "r", "r+", "r-", "p'", "p''")
RYDBERG_LEVELS = frozenset({"r", "r+", "r-", "p'", "p''"})
R_TYPE_LEVELS = ("r", "r+", "r-")
PAIR_LEVELS = ("p'", "p''")

# Ratio of the "eq1" to the "split" effective pair-coupling element.
SPLITTING_CONVENTION_RATIO = 2.0 * sqrt(2.0)


class BasisError(ValueError):
    """Misconfigured or oversized basis."""


def pair_mode(level_a: str, level_b: str) -> str:
    """Canonical token of the transfer-pair quasi-mode fed by (A, B)."""
    for lev in (level_a, level_b):
        if lev not in R_TYPE_LEVELS:
            raise BasisError(f"{lev!r} is not an interacting r-type level")
    a, b = sorted((level_a, level_b), key=R_TYPE_LEVELS.index)
    return f"P[{a},{b}]"


def is_pair_mode(level: str) -> bool:
    return level.startswith("P[")


def pair_channel(token: str) -> tuple[str, str]:
    """Inverse of pair_mode."""
    a, b = token[2:-1].split(",")
    return a, b


def level_weight(level: str) -> int:
    """Atoms consumed by one quantum of this level (pair modes hold two)."""
    return 2 if is_pair_mode(level) else 1


def _is_rydberg(level: str) -> bool:
    return level in RYDBERG_LEVELS or is_pair_mode(level)


@dataclass(frozen=True)
class Basis:
    """Ordered collective basis with dense index lookup.

    For mode "symmetric" each state is a tuple of occupations aligned with
    ``levels`` (ground occupancy is implicit: N minus the weighted sum).
    For mode "pair-resolved" each state is a length-N tuple of level names.
    """

    mode: str
    n_atoms: int
    levels: tuple[str, ...]        # non-ground levels, canonical order
    states: tuple[tuple, ...]
    index: dict

    @property
    def dim(self) -> int:
        return len(self.states)

    def excitations(self, i: int) -> int:
        state = self.states[i]
        if self.mode == "symmetric":
            return sum(n * level_weight(l) for n, l in zip(state, self.levels))
        return sum(1 for lev in state if lev != GROUND)

    def occupation(self, i: int, level: str) -> int:
        state = self.states[i]
        if self.mode == "symmetric":
            if level == GROUND:
                return self.n_atoms - self.excitations(i)
            return state[self.levels.index(level)] if level in self.levels else 0
        return sum(1 for lev in state if lev == level)

    def rydberg_count(self, i: int) -> int:
        """Interacting-manifold quanta (pair modes count two)."""
        state = self.states[i]
        if self.mode == "symmetric":
            return sum(
                n * level_weight(l)
                for n, l in zip(state, self.levels)
                if _is_rydberg(l)
            )
        return sum(1 for lev in state if lev in RYDBERG_LEVELS)

    def state_index(self, spec) -> int:
        """Index of a state given as {level: count} (symmetric) or a tuple
        of per-atom levels (pair-resolved)."""
        if self.mode == "symmetric":
            occ = dict(spec)
            unknown = set(occ) - set(self.levels) - {GROUND}
            if unknown:
                raise KeyError(f"levels {sorted(unknown)} not in basis")
            key = tuple(occ.get(lev, 0) for lev in self.levels)
        else:
            key = tuple(spec)
        if key not in self.index:
            raise KeyError(f"state {spec!r} not in basis")
        return self.index[key]

    def ground_index(self) -> int:
        if self.mode == "symmetric":
            return self.index[tuple(0 for _ in self.levels)]
        return self.index[tuple(GROUND for _ in range(self.n_atoms))]

    def label(self, i: int) -> str:
        state = self.states[i]
        if self.mode == "symmetric":
            parts = [
                lev if n == 1 else f"{lev}^{n}"
                for lev, n in zip(self.levels, state)
                if n > 0
            ]
            return " ".join(parts) if parts else GROUND
        return ",".join(state)

    def basis_vector(self, spec) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.state_index(spec)] = 1.0
        return psi


@dataclass(frozen=True)
class Operator:
    """Sparse operator over a basis (rad/us for Hamiltonian terms)."""

    basis: Basis
    matrix: sparse.csr_matrix

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def __add__(self, other: "Operator") -> "Operator":
        if other.basis is not self.basis and other.basis != self.basis:
            raise ValueError("operators live on different bases")
        return Operator(self.basis, (self.matrix + other.matrix).tocsr())


def hermiticity_defect(op: Operator) -> float:
    """Largest |H - H^dagger| entry."""
    d = op.matrix - op.matrix.conjugate().transpose()
    return 0.0 if d.nnz == 0 else float(np.abs(d.data).max())


def enumerate_basis(
    n_atoms: int,
    levels,
    n_max: int,
    mode: str = "symmetric",
    ryd_max: int | None = None,
    n_oracle: int = 5,
    max_dim: int = 100_000,
) -> Basis:
    """Enumerate all states with at most n_max excitations.

    levels: the non-ground levels to include ("g" entries are ignored).
    Requesting p'/p'' in symmetric mode creates one transfer-pair
    quasi-mode per channel of the r-type levels present; at most one pair
    is occupied, holding two atoms and two excitations.  ryd_max, when
    set, additionally caps the interacting-manifold quanta; ryd_max=1
    realizes a perfectly blockaded register.  Pair-resolved mode keeps
    p'/p'' as literal atom levels and is limited to n_atoms <= n_oracle.
    """
    req = set(levels) - {GROUND}
    singles = tuple(lev for lev in LEVEL_ORDER if lev in req)
    unknown = req - set(singles)
    if unknown:
        raise BasisError(f"unknown levels {sorted(unknown)}")
    if sum(lev in singles for lev in PAIR_LEVELS) == 1:
        raise BasisError("pair levels p' and p'' must be included together")
    if n_max > n_atoms:
        raise BasisError(f"n_max={n_max} exceeds n_atoms={n_atoms}")
    if n_max < 0:
        raise BasisError("n_max must be non-negative")

    states: list[tuple] = []
    if mode == "symmetric":
        want_pairs = any(lev in PAIR_LEVELS for lev in singles)
        singles = tuple(lev for lev in singles if lev not in PAIR_LEVELS)
        levs = singles
        if want_pairs:
            r_present = [lev for lev in singles if lev in R_TYPE_LEVELS]
            if not r_present:
                raise BasisError("pair levels require an r-type level")
            channels = [
                pair_mode(a, b)
                for i, a in enumerate(r_present)
                for b in r_present[i:]
            ]
            levs = singles + tuple(channels)
        weights = [level_weight(lev) for lev in levs]
        ranges = [range(n_max // w + 1) for w in weights]
        for occ in product(*ranges):
            if sum(n * w for n, w in zip(occ, weights)) > n_max:
                continue
            if sum(n for n, l in zip(occ, levs) if is_pair_mode(l)) > 1:
                continue
            if ryd_max is not None:
                ryd = sum(
                    n * w
                    for n, w, l in zip(occ, weights, levs)
                    if _is_rydberg(l)
                )
                if ryd > ryd_max:
                    continue
            states.append(occ)
        weighted = {
            occ: sum(n * w for n, w in zip(occ, weights)) for occ in states
        }
        states.sort(key=lambda occ: (weighted[occ], occ))
    elif mode == "pair-resolved":
        if n_atoms > n_oracle:
            raise BasisError(
                f"pair-resolved mode supports n_atoms <= {n_oracle}, got {n_atoms}"
            )
        levs = singles
        atom_levels = (GROUND,) + levs
        for assignment in product(atom_levels, repeat=n_atoms):
            n_exc = sum(1 for lev in assignment if lev != GROUND)
            if n_exc > n_max:
                continue
            if ryd_max is not None:
                if sum(1 for lev in assignment if lev in RYDBERG_LEVELS) > ryd_max:
                    continue
            states.append(assignment)
        states.sort(key=lambda s: (sum(1 for lev in s if lev != GROUND), s))
    else:
        raise BasisError(f"unknown basis mode {mode!r}")

    if len(states) > max_dim:
        raise BasisError(f"basis dimension {len(states)} exceeds cap {max_dim}")
    return Basis(
        mode=mode,
        n_atoms=n_atoms,
        levels=levs,
        states=tuple(states),
        index={s: i for i, s in enumerate(states)},
    )


def _coo(basis, rows, cols, vals) -> Operator:
    m = sparse.coo_matrix(
        (np.asarray(vals, dtype=complex), (rows, cols)),
        shape=(basis.dim, basis.dim),
    ).tocsr()
    m.sum_duplicates()
    m.sort_indices()
    return Operator(basis, m)


def _occ_move(basis, i, occ, frm, to):
    """Occupation tuple with one atom moved frm -> to, or None if empty."""
    occ = list(occ)
    if frm == GROUND:
        if basis.occupation(i, GROUND) < 1:
            return None
    else:
        k = basis.levels.index(frm)
        if occ[k] < 1:
            return None
        occ[k] -= 1
    if to != GROUND:
        occ[basis.levels.index(to)] += 1
    return tuple(occ)


def _check_levels(basis, *levels):
    for lev in levels:
        if lev != GROUND and lev not in basis.levels:
            raise BasisError(f"level {lev!r} not in basis")


def collective_op(basis: Basis, frm: str, to: str) -> Operator:
    """Collective transfer operator sum_i |to_i><frm_i| / sqrt(N).

    In the symmetric basis the matrix element between occupation states is
    sqrt(n_frm (n_to + 1) / N); in pair-resolved mode the literal atom sum
    is built.
    """
    _check_levels(basis, frm, to)
    rows, cols, vals = [], [], []
    rootn = sqrt(basis.n_atoms)
    if basis.mode == "symmetric":
        if is_pair_mode(frm) or is_pair_mode(to):
            raise BasisError("pair quasi-modes are not single-atom levels")
        for j, occ in enumerate(basis.states):
            n_frm = basis.occupation(j, frm)
            if frm == to:
                if n_frm:
                    rows.append(j)
                    cols.append(j)
                    vals.append(n_frm / rootn)
                continue
            new = _occ_move(basis, j, occ, frm, to)
            if new is None or new not in basis.index:
                continue
            n_to = basis.occupation(j, to)
            rows.append(basis.index[new])
            cols.append(j)
            vals.append(sqrt(n_frm * (n_to + 1)) / rootn)
    else:
        for j, state in enumerate(basis.states):
            for i, lev in enumerate(state):
                if lev != frm:
                    continue
                new = state[:i] + (to,) + state[i + 1:]
                if new in basis.index:
                    rows.append(basis.index[new])
                    cols.append(j)
                    vals.append(1.0 / rootn)
    return _coo(basis, rows, cols, vals)


def number_op(basis: Basis, level: str) -> Operator:
    """Diagonal occupancy of one level."""
    _check_levels(basis, level)
    diag = [basis.occupation(i, level) for i in range(basis.dim)]
    idx = list(range(basis.dim))
    return _coo(basis, idx, idx, diag)


def drive_term(
    basis: Basis,
    frm: str,
    to: str,
    rabi: float,
    phase: float = 0.0,
    detuning: float = 0.0,
) -> Operator:
    """Classical drive on one transition.

    H = (rabi/2) e^{i phase} sqrt(N) Sigma(to<-frm) + h.c.
        + detuning * (occupancy of `to`)

    so <r^1|H|g> = sqrt(N) rabi / 2 at zero phase, and a single atom
    reduces to the usual rabi/2 coupling.
    """
    sig = collective_op(basis, frm, to)
    amp = 0.5 * rabi * np.exp(1j * phase) * sqrt(basis.n_atoms)
    up = amp * sig.matrix
    h = (up + up.conjugate().transpose()).tocsr()
    if detuning != 0.0:
        h = (h + detuning * number_op(basis, to).matrix).tocsr()
    h.sum_duplicates()
    h.sort_indices()
    return Operator(basis, h)


def dipole_term(basis: Basis, coupling, convention: str = "split") -> Operator:
    """Resonant pair-excitation transfer (r, r) <-> (p', p'').

    Pair-resolved mode takes a CouplingMatrix (or an (N, N) array) and
    builds the literal hopping sum_{i>j} kappa_ij |r_i r_j>(<p'_i p''_j| +
    <p'_j p''_i|) + h.c., extended to all r-type levels.  Singly excited
    states are untouched and total excitation number is conserved.

    Symmetric mode takes a scalar effective coupling kappa_bar and couples
    each doubly-excited channel (A, B) to its own quasi-mode P[A,B].  The
    |r-type^2| <-> pair element is kappa_bar/2 under convention "split"
    (hybridized eigenstates split by exactly kappa_bar) or
    sqrt(2) kappa_bar under "eq1" (exact projection of the literal uniform
    hopping); cross channels use the same calibrated element.
    """
    rows, cols, vals = [], [], []
    if basis.mode == "pair-resolved":
        kappa = np.asarray(getattr(coupling, "kappa", coupling), dtype=float)
        if kappa.shape != (basis.n_atoms, basis.n_atoms):
            raise BasisError(
                f"coupling matrix shape {kappa.shape} does not match N={basis.n_atoms}"
            )
        _check_levels(basis, *PAIR_LEVELS)
        for j, state in enumerate(basis.states):
            for a in range(basis.n_atoms):
                if state[a] not in R_TYPE_LEVELS:
                    continue
                for b in range(a + 1, basis.n_atoms):
                    if state[b] not in R_TYPE_LEVELS:
                        continue
                    for pa, pb in ((PAIR_LEVELS[0], PAIR_LEVELS[1]),
                                   (PAIR_LEVELS[1], PAIR_LEVELS[0])):
                        new = list(state)
                        new[a], new[b] = pa, pb
                        new = tuple(new)
                        if new in basis.index:
                            rows.append(basis.index[new])
                            cols.append(j)
                            vals.append(kappa[a, b])
    else:
        if convention not in ("split", "eq1"):
            raise ValueError(f"unknown splitting convention {convention!r}")
        kbar = float(coupling)
        s = kbar if convention == "eq1" else kbar / SPLITTING_CONVENTION_RATIO
        channels = [lev for lev in basis.levels if is_pair_mode(lev)]
        if not channels:
            raise BasisError("basis has no transfer-pair quasi-modes")
        for tok in channels:
            la, lb = pair_channel(tok)
            ia = basis.levels.index(la)
            ib = basis.levels.index(lb)
            it = basis.levels.index(tok)
            for j, occ in enumerate(basis.states):
                n_pair = occ[it]
                if la == lb:
                    na = occ[ia]
                    if na < 2:
                        continue
                    elem = s * sqrt(na * (na - 1)) * sqrt(n_pair + 1)
                else:
                    na, nb = occ[ia], occ[ib]
                    if na < 1 or nb < 1:
                        continue
                    # cross channels use the same calibrated element
                    elem = s * sqrt(2.0) * sqrt(na * nb) * sqrt(n_pair + 1)
                new = list(occ)
                new[ia] -= 1
                new[ib] -= 1
                new[it] += 1
                new = tuple(new)
                if new in basis.index:
                    rows.append(basis.index[new])
                    cols.append(j)
                    vals.append(elem)
    up = sparse.coo_matrix(
        (np.asarray(vals, dtype=complex), (rows, cols)),
        shape=(basis.dim, basis.dim),
    ).tocsr()
    h = (up + up.conjugate().transpose()).tocsr()
    h.sum_duplicates()
    h.sort_indices()
    return Operator(basis, h)


def rydberg_number(basis: Basis) -> Operator:
    """Total occupancy of the interacting manifold (pair modes count two)."""
    diag = [basis.rydberg_count(i) for i in range(basis.dim)]
    idx = list(range(basis.dim))
    return _coo(basis, idx, idx, diag)


def dephasing_term(basis: Basis, gamma_r: float) -> Operator:
    """Anti-Hermitian decay -i (gamma_r/2) * (interacting-manifold occupancy).

    Folding this into the effective Hamiltonian makes the squared norm of a
    state with n excited-manifold quanta decay as exp(-n gamma_r t); the
    accumulated norm loss is the decoherence-error proxy.
    """
    if gamma_r < 0:
        raise ValueError(f"gamma_r must be >= 0, got {gamma_r}")
    num = rydberg_number(basis)
    return Operator(basis, (-0.5j * gamma_r) * num.matrix)


def symmetric_embedding(sym_basis: Basis, pr_basis: Basis) -> np.ndarray:
    """Isometry from the symmetric basis into the pair-resolved basis.

    Column k is the normalized symmetrization of all atom assignments with
    the occupations of symmetric state k; the same-level pair quasi-mode
    P[r,r] maps onto one p' atom plus one p'' atom.  E^dagger A_pr E
    reproduces the symmetric-mode matrix of any permutation-invariant
    pair-resolved operator A_pr.  Cross-channel pair modes have no literal
    counterpart and are rejected.
    """
    if sym_basis.mode != "symmetric" or pr_basis.mode != "pair-resolved":
        raise BasisError("expected (symmetric, pair-resolved) bases")
    if sym_basis.n_atoms != pr_basis.n_atoms:
        raise BasisError("atom numbers differ")
    n = sym_basis.n_atoms

    # translate each symmetric occupation into per-atom level counts
    pr_levels = pr_basis.levels
    targets = {}
    for k, occ in enumerate(sym_basis.states):
        counts = dict.fromkeys(pr_levels, 0)
        ok = True
        for lev, cnt in zip(sym_basis.levels, occ):
            if cnt == 0:
                continue
            if is_pair_mode(lev):
                a, b = pair_channel(lev)
                if a != b:
                    raise BasisError(
                        "cross-channel pair modes have no literal counterpart"
                    )
                if cnt > 1 or PAIR_LEVELS[0] not in counts:
                    ok = False
                    break
                counts[PAIR_LEVELS[0]] += 1
                counts[PAIR_LEVELS[1]] += 1
            elif lev in counts:
                counts[lev] += cnt
            else:
                ok = False
                break
        if ok:
            targets[tuple(counts[lev] for lev in pr_levels)] = k

    mult = {}
    for key, k in targets.items():
        m = 1
        remaining = n
        for cnt in key:
            m *= comb(remaining, cnt)
            remaining -= cnt
        mult[k] = m

    emb = np.zeros((pr_basis.dim, sym_basis.dim))
    for i, state in enumerate(pr_basis.states):
        key = tuple(
            sum(1 for lev in state if lev == l) for l in pr_levels
        )
        if key in targets:
            k = targets[key]
            emb[i, k] = 1.0 / sqrt(mult[k])
    return emb
