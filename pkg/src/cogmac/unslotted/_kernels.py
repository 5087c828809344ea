"""Event-walk kernels of the un-slotted continuous-time simulators.

Channel sample paths (alternating busy/free flip epochs) are pregenerated
outside and walked with monotone per-channel pointers.  Randomness inside a
run reduces to one pregenerated uniform per sensing event, consumed in
event order, so both execution paths produce identical results.
"""

import numpy as np

from .._accel import jit_kernel

_INF = 1e300


@jit_kernel
def multi_channel_walk(epochs, off, s0, tf, tb, ts, pfa, pmd, u_sense,
                       horizon, acc, r_bins, sense_log_t, sense_log_ch,
                       sense_log_out, counters):
    """Periodic sensing with per-outcome periods on all channels at once.

    acc rows per channel: [t_su, t_int, t_u, t_o, r_use].
    counters: [n_sense_events].  Sensing events are serialized on the single
    antenna FIFO by scheduled time (ties by channel index); every channel's
    transmission pauses while any sensing is in progress.
    """
    n = tf.shape[0]
    state = s0.copy()
    ptr = np.zeros(n, np.int64)
    flip = np.empty(n, np.float64)
    for i in range(n):
        flip[i] = epochs[off[i]] if off[i] < off[i + 1] else _INF
    believed = np.zeros(n, np.uint8)
    sched = np.zeros(n, np.float64)

    t = 0.0
    sensing_ch = -1
    ant_end = 0.0
    k_sense = 0
    nbins = r_bins.shape[0]
    bin_w = horizon / nbins if nbins > 0 else 0.0

    while t < horizon:
        # next event: channel flip, sensing completion, or sensing start
        tnext = horizon
        for i in range(n):
            if flip[i] < tnext:
                tnext = flip[i]
        start_now = -1
        if sensing_ch >= 0:
            if ant_end < tnext:
                tnext = ant_end
        else:
            c = -1
            smin = _INF
            for i in range(n):
                if sched[i] < smin:
                    smin = sched[i]
                    c = i
            start = smin if smin > t else t
            if start <= t:
                start_now = c
            elif start < tnext:
                tnext = start

        if start_now >= 0:
            c = start_now
            if ts > 0.0:
                sensing_ch = c
                ant_end = t + ts
                continue
            # zero-duration sensing resolves immediately
            true_free = state[c] == 1
            uu = u_sense[k_sense]
            sensed = (uu >= pfa) if true_free else (uu < pmd)
            sense_log_t[k_sense] = t
            sense_log_ch[k_sense] = c
            sense_log_out[k_sense] = 1 if sensed else 0
            k_sense += 1
            believed[c] = 1 if sensed else 0
            sched[c] = t + (tf[c] if sensed else tb[c])
            continue

        dt = tnext - t
        if dt > 0.0:
            paused = sensing_ch >= 0
            for i in range(n):
                if believed[i] == 1:
                    acc[i, 0] += dt
                    if state[i] == 1:
                        if paused:
                            acc[i, 3] += dt
                        else:
                            acc[i, 4] += dt
                            if nbins > 0:
                                b = int((t + 0.5 * dt) / bin_w)
                                if b >= nbins:
                                    b = nbins - 1
                                r_bins[b] += dt
                    else:
                        if not paused:
                            acc[i, 1] += dt
                else:
                    if state[i] == 1:
                        acc[i, 2] += dt
            t = tnext

        # state flips due at t
        for i in range(n):
            while flip[i] <= t:
                state[i] = 1 - state[i]
                ptr[i] += 1
                nxt = off[i] + ptr[i]
                flip[i] = epochs[nxt] if nxt < off[i + 1] else _INF

        # sensing completion at t
        if sensing_ch >= 0 and t >= ant_end:
            c = sensing_ch
            true_free = state[c] == 1
            uu = u_sense[k_sense]
            sensed = (uu >= pfa) if true_free else (uu < pmd)
            sense_log_t[k_sense] = t - ts
            sense_log_ch[k_sense] = c
            sense_log_out[k_sense] = 1 if sensed else 0
            k_sense += 1
            believed[c] = 1 if sensed else 0
            sched[c] = t + (tf[c] if sensed else tb[c])
            sensing_ch = -1
    counters[0] = k_sense


@jit_kernel
def _state_at(epochs, off, state, ptr, flip, c, t):
    while flip[c] <= t:
        state[c] = 1 - state[c]
        ptr[c] += 1
        nxt = off[c] + ptr[c]
        flip[c] = epochs[nxt] if nxt < off[c + 1] else _INF
    return state[c]


@jit_kernel
def single_channel_walk(epochs, off, s0, lam_sum, u, tfstar, ts, d_hand,
                        pfa, pmd, u_sense, horizon,
                        tx_state, tx_time, rx_state, rx_time,
                        acc, r_bins, delays, counters,
                        act_t0, act_t1, act_ch, act_kind):
    """Channel hopping with a request/clear handshake.

    Both endpoints keep a (last sensed state, last sense time) table; the
    receiver updates its copy only from what the handshake leaks (request
    seen means sensed free, timeout means busy) and both apply the same
    revisit ordering, so channel agreement is earned, not assumed.  Every
    failed attempt costs the full sense + request + clear window on both
    sides to keep them in lockstep.

    acc rows per channel: [transmit_time, busy_overlap, sense_time, useful].
    counters: [attempts, transmissions, handshake_failures, sync_failures,
    n_actions].  act_kind: 0 sense, 1 transmit.
    """
    n = tfstar.shape[0]
    state = s0.copy()
    ptr = np.zeros(n, np.int64)
    flip = np.empty(n, np.float64)
    for i in range(n):
        flip[i] = epochs[off[i]] if off[i] < off[i + 1] else _INF

    t = 0.0
    k_sense = 0
    n_delay = 0
    n_act = 0
    attempt_cost = ts + 2.0 * d_hand
    order_tx = np.empty(n, np.int64)
    order_rx = np.empty(n, np.int64)
    gam = np.empty(n, np.float64)
    used = np.zeros(n, np.uint8)

    while t < horizon:
        round_start = t
        # revisit index, transmitter side then receiver side
        for side in range(2):
            st = tx_state if side == 0 else rx_state
            tm = tx_time if side == 0 else rx_time
            for i in range(n):
                el = t - tm[i]
                dec = np.exp(-lam_sum[i] * el)
                if st[i] == 1:
                    p = (1.0 - u[i]) + u[i] * dec
                else:
                    p = (1.0 - u[i]) * (1.0 - dec)
                gam[i] = p / ts
            for i in range(n):
                used[i] = 0
            dst = order_tx if side == 0 else order_rx
            for k in range(n):
                best = -1.0
                pick = -1
                for i in range(n):
                    if used[i] == 0 and gam[i] > best:
                        best = gam[i]
                        pick = i
                used[pick] = 1
                dst[k] = pick

        transmitted = False
        for k in range(n):
            c = order_tx[k]
            if order_rx[k] != c:
                counters[3] += 1
            counters[0] += 1
            sense_start = t
            t_out = t + ts
            true_free = _state_at(epochs, off, state, ptr, flip, c, t_out) == 1
            uu = u_sense[k_sense]
            k_sense += 1
            sensed = (uu >= pfa) if true_free else (uu < pmd)
            if n_act < act_t0.shape[0]:
                act_t0[n_act] = sense_start
                act_t1[n_act] = t_out
                act_ch[n_act] = c
                act_kind[n_act] = 0
                n_act += 1
            acc[c, 2] += ts

            if sensed and order_rx[k] == c:
                rts_ok = _state_at(epochs, off, state, ptr, flip, c, t_out) == 1
                if rts_ok:
                    # handshake completes; transmit one access period
                    tx_state[c] = 1
                    tx_time[c] = t_out
                    rx_state[c] = 1
                    rx_time[c] = t_out
                    a = t_out + 2.0 * d_hand
                    b = a + tfstar[c]
                    if n_delay < delays.shape[0]:
                        delays[n_delay] = a - round_start
                        n_delay += 1
                    if n_act < act_t0.shape[0]:
                        act_t0[n_act] = a
                        act_t1[n_act] = b
                        act_ch[n_act] = c
                        act_kind[n_act] = 1
                        n_act += 1
                    # integrate true state over [a, min(b, horizon))
                    end = b if b < horizon else horizon
                    seg = a
                    cur = _state_at(epochs, off, state, ptr, flip, c, a)
                    while seg < end:
                        nxt = flip[c] if flip[c] < end else end
                        span = nxt - seg
                        if cur == 1:
                            acc[c, 3] += span
                        else:
                            acc[c, 1] += span
                        if a < horizon:
                            lo = seg
                            hi = nxt
                            if cur == 1 and r_bins.shape[0] > 0:
                                bw = horizon / r_bins.shape[0]
                                bidx = int((0.5 * (lo + hi)) / bw)
                                if bidx >= r_bins.shape[0]:
                                    bidx = r_bins.shape[0] - 1
                                r_bins[bidx] += span
                        seg = nxt
                        if seg < end:
                            cur = _state_at(epochs, off, state, ptr, flip, c,
                                            seg)
                    acc[c, 0] += end - a if end > a else 0.0
                    counters[1] += 1
                    t = b
                    transmitted = True
                    break
                # request lost to the primary: both sides treat as busy
                counters[2] += 1
                tx_state[c] = 0
                tx_time[c] = t_out
                rx_state[order_rx[k]] = 0
                rx_time[order_rx[k]] = t_out
                t = t_out + 2.0 * d_hand
            else:
                # sensed busy, or endpoints disagree on the channel: no
                # request seen by the receiver, both mark busy and hop
                if sensed:
                    counters[2] += 1
                tx_state[c] = 0
                tx_time[c] = t_out
                rx_state[order_rx[k]] = 0
                rx_time[order_rx[k]] = t_out
                t = t_out + 2.0 * d_hand
            if t >= horizon:
                break
    counters[4] = n_act
    counters[5] = k_sense
    counters[6] = n_delay


@jit_kernel
def free_time_totals(epochs, off, s0, horizon, out):
    """True free time per channel over [0, horizon)."""
    n = out.shape[0]
    for i in range(n):
        t = 0.0
        cur = s0[i]
        total = 0.0
        for k in range(off[i], off[i + 1]):
            e = epochs[k]
            if e >= horizon:
                break
            if cur == 1:
                total += e - t
            t = e
            cur = 1 - cur
        if cur == 1:
            total += horizon - t
        out[i] = total
