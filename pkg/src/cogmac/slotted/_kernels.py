"""Slot-loop kernel of the slotted-network simulator.

One call advances a contiguous block of slots for a single run.  The driver
splits a run into blocks only where the Whittle index tables of a blind
policy are refreshed; every other policy runs in one block.  All randomness
is pregenerated (one uniform per slot and channel for the chain moves, one
for the sensing noise) so results are bit-identical between the compiled
and the pure-Python path and across policies sharing a seed.

The receiver is carried as a genuinely separate set of shared-state arrays
(`rx_*`) updated only from what it can observe: delivered packets and its
own copy of the decision rule.  Decision mismatches are counted instead of
assumed away.
"""

import numpy as np

from .._accel import jit_kernel

POLICY_FULL_INFORMED = 0
POLICY_FULL_BLIND = 1
POLICY_WHITTLE_INFORMED = 2
POLICY_WHITTLE_BLIND = 3
POLICY_GREEDY_INFORMED = 4
POLICY_UCB = 5
POLICY_FIXED = 6

# indices into the int64 state vector
F_LAST_ACK = 0
F_PREV_ISTAR = 1
F_SUCCESSES = 2
F_COLLISIONS = 3
F_RESYNCS = 4
F_SYNC_VIOLATIONS = 5
F_IMPOSSIBLE = 6
F_LP_ACCESSES = 7
N_FLAGS = 8

_BELIEF_POLICIES = (POLICY_FULL_INFORMED, POLICY_FULL_BLIND,
                    POLICY_WHITTLE_INFORMED, POLICY_WHITTLE_BLIND,
                    POLICY_GREEDY_INFORMED)


@jit_kernel
def _interp_row(tab, grid_n, om):
    pos = om * (grid_n - 1)
    idx = int(pos)
    if idx > grid_n - 2:
        idx = grid_n - 2
    frac = pos - idx
    return tab[idx] * (1.0 - frac) + tab[idx + 1] * frac


@jit_kernel
def slot_loop(j0, j1, policy, L, lp, lp_total, strict, lp_access,
              u_chan, u_sense, p01t, p11t, bw, pfa, pmd,
              s, omega_bar, omega_tx, rx_omega_bar,
              pbar01, pbar11, rx_pbar01, rx_pbar11, phat01, phat11,
              cnt, n1, nobs, prev_sensed, ucb_x, ucb_y, fixed_ch,
              wtab, flags,
              succ, log_istar, log_ack, log_sensed, log_resync):
    n = p01t.shape[0]
    gt = wtab.shape[1]
    blind = policy == POLICY_FULL_BLIND or policy == POLICY_WHITTLE_BLIND
    is_belief = (policy == POLICY_FULL_INFORMED or policy == POLICY_FULL_BLIND
                 or policy == POLICY_WHITTLE_INFORMED
                 or policy == POLICY_WHITTLE_BLIND
                 or policy == POLICY_GREEDY_INFORMED)

    sense_flag = np.zeros(n, np.uint8)
    sensed = np.empty(n, np.int8)
    new_ob = np.empty(n, np.float64)
    new_orx = np.empty(n, np.float64)
    new_otx = np.empty(n, np.float64)
    scores = np.empty(n, np.float64)
    taken = np.zeros(n, np.uint8)

    for j in range(j0, j1):
        in_lp = policy == POLICY_WHITTLE_BLIND and j < lp_total
        for i in range(n):
            sense_flag[i] = 0
            sensed[i] = -1

        # ---- decision (transmitter side and receiver replica) ----
        istar = -1
        istar_rx = -1
        if in_lp:
            group = j // lp
            lo = group * L
            hi = lo + L
            if hi > n:
                hi = n
            for i in range(lo, hi):
                sense_flag[i] = 1
        elif policy == POLICY_FIXED:
            istar = fixed_ch
            istar_rx = fixed_ch
            sense_flag[fixed_ch] = 1
        elif policy == POLICY_UCB:
            seed_ch = -1
            for i in range(n):
                if ucb_y[i] == 0:
                    seed_ch = i
                    break
            if seed_ch >= 0:
                istar = seed_ch
            else:
                lnj = np.log(j + 1.0)
                best = -1e300
                for i in range(n):
                    gam = (ucb_x[i] / ucb_y[i]
                           + np.sqrt(2.0 * lnj / ucb_y[i])) * bw[i]
                    if gam > best:
                        best = gam
                        istar = i
            istar_rx = istar  # receiver derives the same tallies by rule
            sense_flag[istar] = 1
        else:
            if policy == POLICY_WHITTLE_INFORMED or policy == POLICY_WHITTLE_BLIND:
                for i in range(n):
                    scores[i] = _interp_row(wtab[i], gt, omega_bar[i])
                best = -1e300
                for i in range(n):
                    v = scores[i] * bw[i]
                    if v > best:
                        best = v
                        istar = i
                # receiver replica decision from its own beliefs
                best = -1e300
                for i in range(n):
                    v = _interp_row(wtab[i], gt, rx_omega_bar[i]) * bw[i]
                    if v > best:
                        best = v
                        istar_rx = i
                # sense set: access channel plus top L-1 exploration gains
                sense_flag[istar] = 1
                for i in range(n):
                    taken[i] = 0
                taken[istar] = 1
                for _pick in range(L - 1):
                    best = -1e300
                    pick = -1
                    for i in range(n):
                        if taken[i] == 0:
                            v = scores[i] - omega_bar[i]
                            if v > best:
                                best = v
                                pick = i
                    if pick < 0:
                        break
                    taken[pick] = 1
                    sense_flag[pick] = 1
            else:
                # greedy on believed-free probability times bandwidth
                best = -1e300
                for i in range(n):
                    scores[i] = omega_bar[i] * bw[i]
                    if scores[i] > best:
                        best = scores[i]
                        istar = i
                best = -1e300
                for i in range(n):
                    v = rx_omega_bar[i] * bw[i]
                    if v > best:
                        best = v
                        istar_rx = i
                if policy == POLICY_GREEDY_INFORMED:
                    for i in range(n):
                        taken[i] = 0
                    for _pick in range(L):
                        best = -1e300
                        pick = -1
                        for i in range(n):
                            if taken[i] == 0 and scores[i] > best:
                                best = scores[i]
                                pick = i
                        taken[pick] = 1
                        sense_flag[pick] = 1
                else:
                    for i in range(n):
                        sense_flag[i] = 1
            if istar_rx != istar:
                flags[F_SYNC_VIOLATIONS] += 1

        # ---- primary channels evolve ----
        for i in range(n):
            thr = p11t[i] if s[i] == 1 else p01t[i]
            s[i] = 1 if u_chan[j, i] < thr else 0

        # ---- sensing with detector errors ----
        for i in range(n):
            if sense_flag[i] == 1:
                if s[i] == 1:
                    sensed[i] = 1 if u_sense[j, i] >= pfa else 0
                else:
                    sensed[i] = 1 if u_sense[j, i] < pmd else 0

        # ---- learning: sensed-transition tallies and fresh estimates ----
        strict_gate = (strict == 1 and policy == POLICY_WHITTLE_BLIND
                       and not in_lp)
        for i in range(n):
            if sensed[i] >= 0:
                nobs[i] += 1
                n1[i] += sensed[i]
                if prev_sensed[i] >= 0:
                    if not strict_gate or istar == flags[F_PREV_ISTAR]:
                        cnt[i, prev_sensed[i] * 2 + sensed[i]] += 1
        if blind:
            for i in range(n):
                phat01[i] = (cnt[i, 1] + 1.0) / (cnt[i, 0] + cnt[i, 1] + 2.0)
                phat11[i] = (cnt[i, 3] + 1.0) / (cnt[i, 2] + cnt[i, 3] + 2.0)

        # ---- access and acknowledgment ----
        ack = 0
        if in_lp and lp_access == 1:
            # optional exploratory access on the sensed group
            best = -1e300
            pick = -1
            for i in range(n):
                if sensed[i] == 1 and bw[i] > best:
                    best = bw[i]
                    pick = i
            if pick >= 0:
                flags[F_LP_ACCESSES] += 1
                if s[pick] == 1:
                    succ[j] = bw[pick]
                    flags[F_SUCCESSES] += 1
                else:
                    flags[F_COLLISIONS] += 1
        if istar >= 0 and sensed[istar] == 1:
            if s[istar] == 1:
                ack = 1
                succ[j] = bw[istar]
                flags[F_SUCCESSES] += 1
            else:
                flags[F_COLLISIONS] += 1

        # ---- shared / transmitter belief updates ----
        if is_belief and not in_lp:
            if ack == 1:
                if flags[F_LAST_ACK] == 0:
                    # packet carried the transmitter belief: resynchronize
                    for i in range(n):
                        omega_bar[i] = omega_tx[i]
                        rx_omega_bar[i] = omega_tx[i]
                    flags[F_RESYNCS] += 1
                    log_resync[j] = 1
                for i in range(n):
                    pbar01[i] = phat01[i]
                    pbar11[i] = phat11[i]
                    rx_pbar01[i] = phat01[i]
                    rx_pbar11[i] = phat11[i]
                for i in range(n):
                    if i == istar:
                        new_ob[i] = pbar11[i]
                        new_orx[i] = rx_pbar11[i]
                    elif sensed[i] == 1:
                        om = omega_bar[i]
                        den = (1.0 - pfa) * om + pmd * (1.0 - om)
                        if den <= 0.0:
                            flags[F_IMPOSSIBLE] += 1
                            post = om
                        else:
                            post = (1.0 - pfa) * om / den
                        new_ob[i] = post * pbar11[i] + (1.0 - post) * pbar01[i]
                        om = rx_omega_bar[i]
                        den = (1.0 - pfa) * om + pmd * (1.0 - om)
                        post = (1.0 - pfa) * om / den if den > 0.0 else om
                        new_orx[i] = post * rx_pbar11[i] + (1.0 - post) * rx_pbar01[i]
                    elif sensed[i] == 0:
                        om = omega_bar[i]
                        den = pfa * om + (1.0 - pmd) * (1.0 - om)
                        if den <= 0.0:
                            flags[F_IMPOSSIBLE] += 1
                            post = om
                        else:
                            post = pfa * om / den
                        new_ob[i] = post * pbar11[i] + (1.0 - post) * pbar01[i]
                        om = rx_omega_bar[i]
                        den = pfa * om + (1.0 - pmd) * (1.0 - om)
                        post = pfa * om / den if den > 0.0 else om
                        new_orx[i] = post * rx_pbar11[i] + (1.0 - post) * rx_pbar01[i]
                    else:
                        om = omega_bar[i]
                        new_ob[i] = om * pbar11[i] + (1.0 - om) * pbar01[i]
                        om = rx_omega_bar[i]
                        new_orx[i] = om * rx_pbar11[i] + (1.0 - om) * rx_pbar01[i]
                for i in range(n):
                    omega_bar[i] = new_ob[i]
                    omega_tx[i] = new_ob[i]
                    rx_omega_bar[i] = new_orx[i]
                flags[F_LAST_ACK] = 1
            else:
                for i in range(n):
                    if i == istar:
                        om = omega_bar[i]
                        den = pfa * om + (1.0 - om)
                        if den <= 0.0:
                            flags[F_IMPOSSIBLE] += 1
                            post = om
                        else:
                            post = pfa * om / den
                        new_ob[i] = post * pbar11[i] + (1.0 - post) * pbar01[i]
                        om = rx_omega_bar[i]
                        den = pfa * om + (1.0 - om)
                        post = pfa * om / den if den > 0.0 else om
                        new_orx[i] = post * rx_pbar11[i] + (1.0 - post) * rx_pbar01[i]
                    else:
                        om = omega_bar[i]
                        new_ob[i] = om * pbar11[i] + (1.0 - om) * pbar01[i]
                        om = rx_omega_bar[i]
                        new_orx[i] = om * rx_pbar11[i] + (1.0 - om) * rx_pbar01[i]
                for i in range(n):
                    if i == istar:
                        om = omega_tx[i]
                        den = pfa * om + (1.0 - om)
                        if den <= 0.0:
                            flags[F_IMPOSSIBLE] += 1
                            post = om
                        else:
                            post = pfa * om / den
                        new_otx[i] = post * phat11[i] + (1.0 - post) * phat01[i]
                    elif sensed[i] == 1:
                        om = omega_tx[i]
                        den = (1.0 - pfa) * om + pmd * (1.0 - om)
                        if den <= 0.0:
                            flags[F_IMPOSSIBLE] += 1
                            post = om
                        else:
                            post = (1.0 - pfa) * om / den
                        new_otx[i] = post * phat11[i] + (1.0 - post) * phat01[i]
                    elif sensed[i] == 0:
                        om = omega_tx[i]
                        den = pfa * om + (1.0 - pmd) * (1.0 - om)
                        if den <= 0.0:
                            flags[F_IMPOSSIBLE] += 1
                            post = om
                        else:
                            post = pfa * om / den
                        new_otx[i] = post * phat11[i] + (1.0 - post) * phat01[i]
                    else:
                        om = omega_tx[i]
                        new_otx[i] = om * phat11[i] + (1.0 - om) * phat01[i]
                for i in range(n):
                    omega_bar[i] = new_ob[i]
                    omega_tx[i] = new_otx[i]
                    rx_omega_bar[i] = new_orx[i]
                flags[F_LAST_ACK] = 0
        elif policy == POLICY_UCB and istar >= 0:
            ucb_y[istar] += 1
            if ack == 1:
                ucb_x[istar] += 1
            flags[F_LAST_ACK] = ack
        else:
            flags[F_LAST_ACK] = ack

        # ---- logs and previous-slot state ----
        log_istar[j] = istar
        log_ack[j] = ack
        for i in range(n):
            log_sensed[j, i] = sensed[i]
            prev_sensed[i] = sensed[i]
        flags[F_PREV_ISTAR] = istar

        # ---- leaving the learning phase: seed shared state ----
        if policy == POLICY_WHITTLE_BLIND and j == lp_total - 1:
            for i in range(n):
                om = phat01[i] / (phat01[i] + 1.0 - phat11[i])
                omega_bar[i] = om
                omega_tx[i] = om
                rx_omega_bar[i] = om
                pbar01[i] = phat01[i]
                pbar11[i] = phat11[i]
                rx_pbar01[i] = phat01[i]
                rx_pbar11[i] = phat11[i]
                # the regime switch breaks "consecutively sensed": drop the
                # pending observation so both counting rules agree at j+1
                prev_sensed[i] = -1
            flags[F_LAST_ACK] = 1
