"""Compiled simulation kernels.

All randomness flows through an explicit PCG32 state so that runs are
bit-reproducible across machines and independent of numpy/numba RNG
internals.  The per-tick schedule is: grass growth, shuffled agent actions
(perceive, move, feed, metabolic cost, ageing), hunting-zone hazard, energy
and age deaths, then reproduction.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# Lever indices, kept in sync with config.py.
_GR, _PH, _PM, _PR, _BF, _BG, _BR, _BH, _BV, _FG, _FR, _FH, _FV = range(13)

# Constant-vector indices for the kernel argument `cc`.
C_AMAX_B, C_AMAX_F, C_AREP_B, C_AREP_F, C_REPRO_PROB, C_MAX_OFF, C_STRIDE, \
    C_HAZARD, C_MAX_PREY, C_MAX_FOX, C_INIT_B, C_INIT_F, C_CENTERS, \
    C_DECAY_K = range(14)

_INV_2_32 = 2.3283064365386963e-10  # 2 ** -32

# 8-neighborhood directions for random walks and offspring placement.
DIR_DR = np.array([-1, -1, -1, 0, 0, 1, 1, 1], dtype=np.int64)
DIR_DC = np.array([-1, 0, 1, -1, 1, -1, 0, 1], dtype=np.int64)


def _build_offsets(rmax: int = 3):
    """Cell offsets within Euclidean radius rmax, grouped by distance."""
    offs = []
    for dr in range(-rmax, rmax + 1):
        for dc in range(-rmax, rmax + 1):
            d = math.hypot(dr, dc)
            if d <= rmax + 1e-9:
                offs.append((d, dr, dc))
    offs.sort()
    dist = np.array([o[0] for o in offs], dtype=np.float64)
    odr = np.array([o[1] for o in offs], dtype=np.int64)
    odc = np.array([o[2] for o in offs], dtype=np.int64)
    starts = [0]
    for i in range(1, len(offs)):
        if dist[i] - dist[i - 1] > 1e-9:
            starts.append(i)
    starts.append(len(offs))
    return dist, odr, odc, np.array(starts, dtype=np.int64)


OFF_D, OFF_DR, OFF_DC, GROUP_START = _build_offsets()
N_GROUPS = len(GROUP_START) - 1


@njit(cache=True, inline="always")
def pcg32(state):
    old = state[0]
    state[0] = old * np.uint64(6364136223846793005) + state[1]
    xorshifted = np.uint32((((old >> np.uint64(18)) ^ old) >> np.uint64(27)) & np.uint64(0xFFFFFFFF))
    rot = np.uint32(old >> np.uint64(59))
    return np.uint32((xorshifted >> rot) | (xorshifted << ((np.uint32(32) - rot) & np.uint32(31))))


@njit(cache=True)
def seed_state(seed):
    """Initialize a PCG32 state array from a non-negative integer seed."""
    state = np.zeros(2, dtype=np.uint64)
    state[1] = (np.uint64(seed) << np.uint64(1)) | np.uint64(1)
    pcg32(state)
    state[0] = state[0] + (np.uint64(0x853C49E6748FEA9B) ^ np.uint64(seed))
    pcg32(state)
    return state


@njit(cache=True, inline="always")
def rand_double(state):
    """Uniform in [0, 1)."""
    return np.float64(pcg32(state)) * _INV_2_32


@njit(cache=True, inline="always")
def rand_double_open(state):
    """Uniform in (0, 1); safe for log()."""
    return (np.float64(pcg32(state)) + 0.5) * _INV_2_32


@njit(cache=True, inline="always")
def rand_below(state, n):
    """Unbiased integer in [0, n) via modulo rejection."""
    lim = np.uint32(np.uint64(4294967296) % np.uint64(n))
    while True:
        r = pcg32(state)
        if r >= lim:
            return np.int64(r % np.uint32(n))


@njit(cache=True, inline="always")
def _wrap_delta(d, side):
    """Signed toroidal delta in [-side//2, side//2)."""
    return ((d + side // 2) % side) - side // 2


@njit(cache=True, inline="always")
def _clamp_step(d, stride):
    if d > stride:
        return stride
    if d < -stride:
        return -stride
    return d


@njit(cache=True, inline="always")
def _list_insert(head, nxt, prv, cnt, cell, i):
    nxt[i] = head[cell]
    prv[i] = -1
    if head[cell] >= 0:
        prv[head[cell]] = i
    head[cell] = i
    cnt[cell] += 1


@njit(cache=True, inline="always")
def _list_remove(head, nxt, prv, cnt, cell, i):
    p = prv[i]
    nx = nxt[i]
    if p >= 0:
        nxt[p] = nx
    else:
        head[cell] = nx
    if nx >= 0:
        prv[nx] = p
    cnt[cell] -= 1


@njit(cache=True)
def init_kernel(grass, fertile, hunting, species, pos, energy, age, alive,
                state, p, side, cc):
    """Build the initial world in place; returns the number of agents."""
    ncells = side * side
    n_centers = int(cc[C_CENTERS])
    k = cc[C_DECAY_K]
    target = int(math.floor(p[_GR] * 0.01 * ncells + 0.5))
    if target > ncells:
        target = ncells

    crow = np.empty(n_centers, dtype=np.int64)
    ccol = np.empty(n_centers, dtype=np.int64)
    for j in range(n_centers):
        cell = rand_below(state, ncells)
        crow[j] = cell // side
        ccol[j] = cell % side

    # Weighted sampling without replacement (exponential race): the target
    # count is met exactly while closeness to a cluster center boosts odds.
    keys = np.empty(ncells, dtype=np.float64)
    for c in range(ncells):
        row = c // side
        col = c % side
        dmin = 1.0e18
        for j in range(n_centers):
            dr = abs(row - crow[j])
            if dr > side - dr:
                dr = side - dr
            dc = abs(col - ccol[j])
            if dc > side - dc:
                dc = side - dc
            d = math.sqrt(dr * dr + dc * dc)
            if d < dmin:
                dmin = d
        weight = math.exp(-k * dmin)
        keys[c] = -math.log(rand_double_open(state)) / weight
    order = np.argsort(keys)
    for t in range(ncells):
        fertile[t] = False
        hunting[t] = False
    for t in range(target):
        fertile[order[t]] = True

    n_hunt = int(math.floor(p[_PH] * 0.01 * target + 0.5))
    if n_hunt > 0:
        fert_cells = np.empty(target, dtype=np.int64)
        t = 0
        for c in range(ncells):
            if fertile[c]:
                fert_cells[t] = c
                t += 1
        for i in range(n_hunt):
            j = i + rand_below(state, target - i)
            tmp = fert_cells[i]
            fert_cells[i] = fert_cells[j]
            fert_cells[j] = tmp
            hunting[fert_cells[i]] = True

    for c in range(ncells):
        grass[c] = p[_PM] if fertile[c] else 0.0

    n = 0
    nb = int(cc[C_INIT_B])
    nf = int(cc[C_INIT_F])
    span_b = p[_BR] - 1.0 if p[_BR] > 1.0 else 0.0
    span_f = p[_FR] - 1.0 if p[_FR] > 1.0 else 0.0
    for _ in range(nb):
        species[n] = 0
        pos[n] = rand_below(state, ncells)
        energy[n] = 1.0 + rand_double(state) * span_b
        age[n] = 0
        alive[n] = True
        n += 1
    for _ in range(nf):
        species[n] = 1
        pos[n] = rand_below(state, ncells)
        energy[n] = 1.0 + rand_double(state) * span_f
        age[n] = 0
        alive[n] = True
        n += 1
    return n


@njit(cache=True)
def tick_kernel(grass, fertile, hunting, species, pos, energy, age, alive, n,
                state, p, side, cc, head, nxt, prv, cnt):
    """Advance one tick in place; returns (n_agents, n_prey, n_pred, total_grass)."""
    ncells = side * side
    pm = p[_PM]
    pr = p[_PR]
    bf = p[_BF]
    bg = p[_BG]
    br = p[_BR]
    bh = p[_BH]
    bv = p[_BV]
    fg = p[_FG]
    fr = p[_FR]
    fh = p[_FH]
    fv = p[_FV]
    stride = int(cc[C_STRIDE])

    # (1) grass growth
    for c in range(ncells):
        if fertile[c]:
            g2 = grass[c] + pr
            grass[c] = g2 if g2 < pm else pm

    # (2) rebuild per-cell prey lists
    for c in range(ncells):
        head[c] = -1
        cnt[c] = 0
    for i in range(n):
        if species[i] == 0:
            _list_insert(head, nxt, prv, cnt, pos[i], i)

    # (3) shuffled action schedule
    order = np.empty(n, dtype=np.int64)
    for i in range(n):
        order[i] = i
    for i in range(n - 1, 0, -1):
        j = rand_below(state, i + 1)
        tmp = order[i]
        order[i] = order[j]
        order[j] = tmp

    # (4) perceive, move, feed, pay upkeep, age
    for k in range(n):
        i = order[k]
        if not alive[i]:
            continue
        sp = species[i]
        radius = bv if sp == 0 else fv
        cur = pos[i]
        crow = cur // side
        ccol = cur % side

        # Bandicoots graze onward: the occupied cell is not a movement target,
        # so foraging is continuous.  Foxes may hold position on live prey.
        found = False
        trow = -1
        tcol = -1
        gi = 1 if sp == 0 else 0
        while gi < N_GROUPS:
            gstart = GROUP_START[gi]
            if OFF_D[gstart] > radius + 1e-9:
                break
            gend = GROUP_START[gi + 1]
            best_r = -1
            best_c = -1
            for oi in range(gstart, gend):
                r2 = crow + OFF_DR[oi]
                if r2 < 0:
                    r2 += side
                elif r2 >= side:
                    r2 -= side
                c2 = ccol + OFF_DC[oi]
                if c2 < 0:
                    c2 += side
                elif c2 >= side:
                    c2 -= side
                cell = r2 * side + c2
                if sp == 0:
                    hit = grass[cell] >= bf and grass[cell] > 0.0
                else:
                    hit = cnt[cell] > 0
                if hit and (best_r < 0 or r2 < best_r or (r2 == best_r and c2 < best_c)):
                    best_r = r2
                    best_c = c2
            if best_r >= 0:
                found = True
                trow = best_r
                tcol = best_c
                break
            gi += 1

        if found:
            dr = _wrap_delta(trow - crow, side)
            dc = _wrap_delta(tcol - ccol, side)
            nrow = (crow + _clamp_step(dr, stride)) % side
            ncol = (ccol + _clamp_step(dc, stride)) % side
        else:
            d8 = rand_below(state, 8)
            nrow = (crow + DIR_DR[d8] * stride) % side
            ncol = (ccol + DIR_DC[d8] * stride) % side
        newcell = nrow * side + ncol
        if newcell != cur:
            if sp == 0:
                _list_remove(head, nxt, prv, cnt, cur, i)
                _list_insert(head, nxt, prv, cnt, newcell, i)
            pos[i] = newcell

        cell = pos[i]
        if sp == 0:
            if grass[cell] >= bf and grass[cell] > 0.0:
                grass[cell] -= bf
                energy[i] += bg
        else:
            if cnt[cell] > 0:
                victim = head[cell]
                _list_remove(head, nxt, prv, cnt, cell, victim)
                alive[victim] = False
                energy[i] += fg
        energy[i] -= 1.0
        age[i] += 1

    # (5) hunting-zone hazard
    hscale = cc[C_HAZARD]
    for i in range(n):
        if alive[i] and hunting[pos[i]]:
            quota = bh if species[i] == 0 else fh
            if rand_double(state) < hscale * quota * 0.01:
                alive[i] = False

    # (6) starvation and old-age deaths
    amax_b = cc[C_AMAX_B]
    amax_f = cc[C_AMAX_F]
    alive_prey = 0
    alive_fox = 0
    for i in range(n):
        if alive[i]:
            amax = amax_b if species[i] == 0 else amax_f
            if energy[i] < 0.0 or age[i] > amax:
                alive[i] = False
            elif species[i] == 0:
                alive_prey += 1
            else:
                alive_fox += 1

    # (7) reproduction, paused for a species while it is above its crowding cap
    m = n
    cap = species.shape[0]
    max_prey = int(cc[C_MAX_PREY])
    max_fox = int(cc[C_MAX_FOX])
    if max_prey <= 0:
        max_prey = 2147483647
    if max_fox <= 0:
        max_fox = 2147483647
    if alive_prey < max_prey or alive_fox < max_fox:
        arep_b = cc[C_AREP_B]
        arep_f = cc[C_AREP_F]
        rp = cc[C_REPRO_PROB]
        max_off = int(cc[C_MAX_OFF])
        for i in range(n):
            if not alive[i]:
                continue
            sp = species[i]
            if sp == 0:
                if alive_prey >= max_prey:
                    continue
                erep = br
                arep = arep_b
            else:
                if alive_fox >= max_fox:
                    continue
                erep = fr
                arep = arep_f
            if erep > 0.0 and energy[i] >= erep and age[i] >= arep:
                if rand_double(state) < rp:
                    cmax = int(energy[i] / erep)
                    if cmax > max_off:
                        cmax = max_off
                    if cmax < 1:
                        cmax = 1
                    nkids = 1 + rand_below(state, cmax)
                    prow = pos[i] // side
                    pcol = pos[i] % side
                    born = 0
                    for _ in range(nkids):
                        if m >= cap:
                            break
                        d8 = rand_below(state, 8)
                        r2 = (prow + DIR_DR[d8] * stride) % side
                        c2 = (pcol + DIR_DC[d8] * stride) % side
                        species[m] = sp
                        pos[m] = r2 * side + c2
                        energy[m] = erep
                        age[m] = 0
                        alive[m] = True
                        born += 1
                        m += 1
                    energy[i] -= born * erep
                    if sp == 0:
                        alive_prey += born
                    else:
                        alive_fox += born

    # (8) compact live agents to the front
    w = 0
    n_prey = 0
    n_pred = 0
    for i in range(m):
        if alive[i]:
            if w != i:
                species[w] = species[i]
                pos[w] = pos[i]
                energy[w] = energy[i]
                age[w] = age[i]
            alive[w] = True
            if species[w] == 0:
                n_prey += 1
            else:
                n_pred += 1
            w += 1
    for i in range(w, m):
        alive[i] = False

    total_grass = 0.0
    for c in range(ncells):
        total_grass += grass[c]
    return w, n_prey, n_pred, total_grass
