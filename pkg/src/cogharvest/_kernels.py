"""Hot numerical kernels, each with a numba and a pure-numpy implementation.

Backend selection: the environment variable ``COGHARVEST_BACKEND`` may be
``numba``, ``numpy``, or unset. Unset picks numba when it is importable and
falls back to numpy otherwise; ``numba`` demands numba and raises if it is
missing; anything else is rejected at import time.

Callers draw every random variate with a numpy Generator before a kernel
runs, so both backends consume identical input arrays. Kernels that return
integer counts (the battery chains) agree exactly across backends; kernels
that reduce floats (interference sums) differ only in summation order and
agree to roughly 1e-12 relative. Within one backend all results are exactly
reproducible.

Array conventions: point sets for a block of trials are flat float64 arrays
plus an int64 ``offsets`` vector of length n_trials+1; trial t owns the slice
``offsets[t]:offsets[t+1]``.
"""
from __future__ import annotations

import os

import numpy as np

_env = os.environ.get("COGHARVEST_BACKEND", "").strip().lower()
if _env not in ("", "numba", "numpy"):
    raise ValueError(
        f"COGHARVEST_BACKEND={_env!r} is not recognized; use 'numba' or 'numpy'"
    )

if _env == "numpy":
    _HAVE_NUMBA = False
else:
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:
        if _env == "numba":
            raise ImportError(
                "COGHARVEST_BACKEND=numba was requested but numba is not importable"
            )
        _HAVE_NUMBA = False

BACKEND = "numba" if _HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# per-trial power-law sums: out[t] = sum over trial t of r2**(-half_alpha)
# ---------------------------------------------------------------------------

def _power_sums_np(r2, offsets, half_alpha):
    if half_alpha == 2.0:
        vals = 1.0 / (r2 * r2)
    else:
        vals = r2 ** (-half_alpha)
    # sentinel pad keeps every reduceat start index in range; empty segments
    # are masked afterwards because reduceat returns vals[start] for them
    padded = np.concatenate((vals, [0.0]))
    starts = offsets[:-1]
    sums = np.add.reduceat(padded, starts)
    sums[offsets[1:] == starts] = 0.0
    return sums


# ---------------------------------------------------------------------------
# two-state battery chain driven by one uniform per slot.
# State 0 (empty): charge with probability p_h. State 1 (charged): hold with
# probability p_g, otherwise transmit and deplete. Slots with index < skip
# evolve the state but are excluded from the counts.
# Returns (transmit_count, charged_slot_count, counted_slots, final_state).
# ---------------------------------------------------------------------------

def _chain_counts_np(u, p_g, p_h, skip, state):
    tx = 0
    charged = 0
    counted = 0
    for i, v in enumerate(u.tolist()):
        counting = i >= skip
        if counting:
            counted += 1
        if state == 0:
            if v < p_h:
                state = 1
        else:
            if counting:
                charged += 1
            if v < p_g:
                pass
            else:
                if counting:
                    tx += 1
                state = 0
    return tx, charged, counted, state


# ---------------------------------------------------------------------------
# positional battery chain: one block of slots, each slot owning the squared
# distances from the probe node to that slot's primary transmitters. The slot
# is a harvesting slot when min(d2) <= rh2 and a guarded slot when
# min(d2) <= rg2 (an empty slot has min = +inf). Chain semantics as above.
# ---------------------------------------------------------------------------

def _positional_chain_block_np(r2, offsets, rg2, rh2, skip, state):
    padded = np.concatenate((r2, [np.inf]))
    starts = offsets[:-1]
    d2min = np.minimum.reduceat(padded, starts)
    d2min[offsets[1:] == starts] = np.inf
    tx = 0
    charged = 0
    counted = 0
    for i, m in enumerate(d2min.tolist()):
        counting = i >= skip
        if counting:
            counted += 1
        if state == 0:
            if m <= rh2:
                state = 1
        else:
            if counting:
                charged += 1
            if m <= rg2:
                pass
            else:
                if counting:
                    tx += 1
                state = 0
    return tx, charged, counted, state


# ---------------------------------------------------------------------------
# slot interference totals. Per trial: every primary transmitter interferes
# at unit power; a secondary transmitter interferes at power `rho` iff its
# battery is charged and it sits strictly outside every guard disk (radius
# sqrt(rg2)) around the primary transmitters, including the serving one at
# (star_x, 0) when use_star is set. The receiver sits at the origin.
# ---------------------------------------------------------------------------

def _interference_totals_np(
    ppx, ppy, poff, spx, spy, soff, charged, rg2, rho, half_alpha, star_x, use_star
):
    n_trials = poff.shape[0] - 1
    out = np.empty(n_trials)
    for t in range(n_trials):
        p0, p1 = poff[t], poff[t + 1]
        px = ppx[p0:p1]
        py = ppy[p0:p1]
        if p1 > p0:
            ipp = float(np.sum((px * px + py * py) ** (-half_alpha)))
        else:
            ipp = 0.0
        s0, s1 = soff[t], soff[t + 1]
        isp = 0.0
        if s1 > s0:
            keep = charged[s0:s1]
            sx = spx[s0:s1][keep]
            sy = spy[s0:s1][keep]
            if sx.size:
                if use_star:
                    dx = sx - star_x
                    suppressed = dx * dx + sy * sy <= rg2
                else:
                    suppressed = np.zeros(sx.size, dtype=bool)
                if px.size:
                    d2 = (sx[:, None] - px) ** 2 + (sy[:, None] - py) ** 2
                    suppressed |= (d2 <= rg2).any(axis=1)
                live = ~suppressed
                if live.any():
                    lx = sx[live]
                    ly = sy[live]
                    isp = float(np.sum((lx * lx + ly * ly) ** (-half_alpha)))
        out[t] = ipp + rho * isp
    return out


if _HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _power_sums_nb(r2, offsets, half_alpha):
        n_trials = offsets.shape[0] - 1
        out = np.empty(n_trials)
        if half_alpha == 2.0:
            for t in range(n_trials):
                s = 0.0
                for i in range(offsets[t], offsets[t + 1]):
                    s += 1.0 / (r2[i] * r2[i])
                out[t] = s
        else:
            for t in range(n_trials):
                s = 0.0
                for i in range(offsets[t], offsets[t + 1]):
                    s += r2[i] ** (-half_alpha)
                out[t] = s
        return out

    @njit(cache=True, nogil=True)
    def _chain_counts_nb(u, p_g, p_h, skip, state):
        tx = 0
        charged = 0
        counted = 0
        for i in range(u.shape[0]):
            counting = i >= skip
            if counting:
                counted += 1
            if state == 0:
                if u[i] < p_h:
                    state = 1
            else:
                if counting:
                    charged += 1
                if u[i] < p_g:
                    pass
                else:
                    if counting:
                        tx += 1
                    state = 0
        return tx, charged, counted, state

    @njit(cache=True, nogil=True)
    def _positional_chain_block_nb(r2, offsets, rg2, rh2, skip, state):
        n_slots = offsets.shape[0] - 1
        tx = 0
        charged = 0
        counted = 0
        for i in range(n_slots):
            m = np.inf
            for k in range(offsets[i], offsets[i + 1]):
                if r2[k] < m:
                    m = r2[k]
            counting = i >= skip
            if counting:
                counted += 1
            if state == 0:
                if m <= rh2:
                    state = 1
            else:
                if counting:
                    charged += 1
                if m <= rg2:
                    pass
                else:
                    if counting:
                        tx += 1
                    state = 0
        return tx, charged, counted, state

    @njit(cache=True, nogil=True)
    def _interference_totals_nb(
        ppx, ppy, poff, spx, spy, soff, charged, rg2, rho, half_alpha, star_x, use_star
    ):
        n_trials = poff.shape[0] - 1
        out = np.empty(n_trials)
        for t in range(n_trials):
            ipp = 0.0
            for i in range(poff[t], poff[t + 1]):
                d2 = ppx[i] * ppx[i] + ppy[i] * ppy[i]
                ipp += d2 ** (-half_alpha)
            isp = 0.0
            for j in range(soff[t], soff[t + 1]):
                if not charged[j]:
                    continue
                sx = spx[j]
                sy = spy[j]
                if use_star:
                    dx = sx - star_x
                    if dx * dx + sy * sy <= rg2:
                        continue
                ok = True
                for i in range(poff[t], poff[t + 1]):
                    dx = sx - ppx[i]
                    dy = sy - ppy[i]
                    if dx * dx + dy * dy <= rg2:
                        ok = False
                        break
                if ok:
                    d2 = sx * sx + sy * sy
                    isp += d2 ** (-half_alpha)
            out[t] = ipp + rho * isp
        return out

    power_sums = _power_sums_nb
    chain_counts = _chain_counts_nb
    positional_chain_block = _positional_chain_block_nb
    interference_totals = _interference_totals_nb
else:
    _power_sums_nb = None
    _chain_counts_nb = None
    _positional_chain_block_nb = None
    _interference_totals_nb = None

    power_sums = _power_sums_np
    chain_counts = _chain_counts_np
    positional_chain_block = _positional_chain_block_np
    interference_totals = _interference_totals_np
