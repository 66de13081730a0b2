"""Compiled inner loop of the switching controller on the reduced (R, A) system.

Modes: 0 reflection, 1 fixed distance, 2 synchronous restart segment,
3 fixed distance driving A back to 0 (mod 4pi when wrapped).

Reflection uses Euler steps h = min(dt, w_step^2 / qvW) so that one step
moves W = A/R^2 by about w_step, keeping threshold overshoot O(w_step) at
every scale of R. While R is frozen, A is an exact Brownian motion with rate
v = (4/k) sin^2(sqrt(k) R / 2); it is advanced with exact Gaussian increments
on steps adapted to the distance from the exit levels (floored so that the
level resolution is fd_res * eps * R^2), and a Brownian-bridge test catches
crossings inside a step. Both modes compute the same step sizes
and draw the same variates until their paths separate, so runs with a shared
seed are pathwise paired.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi

MODE_REFLECTION = 0
MODE_FIXED = 1
MODE_SYNC = 2
MODE_ZEROING = 3

OUT_COUPLED = 0
OUT_HIT_ETA = 1
OUT_TIMED_OUT = 2


@njit(cache=True)
def wrap4pi(a):
    # exact on (-2pi, 2pi] so wrapped and unwrapped runs stay bit-identical there
    if -TWO_PI < a <= TWO_PI:
        return a
    r = np.fmod(a + TWO_PI, FOUR_PI)
    if r <= 0.0:
        r += FOUR_PI
    return r - TWO_PI


@njit(cache=True)
def _grow(buf, n):
    out = np.empty(2 * buf.shape[0], dtype=buf.dtype)
    out[:n] = buf[:n]
    return out


@njit(cache=True)
def _fd_run(gen, A, t, v, b, absorbing, nb, T_max, h_min, c_fd):
    """Advance A as Brownian motion with rate v until it is absorbed at one of
    the levels b[i] with absorbing[i], or t reaches T_max.

    Non-absorbing levels only shape the step sizes (so that paired runs stay
    in step) and are dropped once crossed. Steps are h = (c_fd d)^2 / v with
    d the distance to the nearest active level, floored at h_min.
    Returns (A, t, index of the absorbing level or -1, steps).
    """
    steps = 0
    sv = math.sqrt(v)
    active = np.ones(nb, dtype=np.bool_)
    while True:
        if t >= T_max:
            return A, T_max, -1, steps
        d = math.inf
        for i in range(nb):
            if active[i]:
                di = abs(A - b[i])
                if di < d:
                    d = di
        h = (c_fd * d) ** 2 / v
        if h < h_min:
            h = h_min
        if h > T_max - t:
            h = T_max - t
        An = A + sv * math.sqrt(h) * gen.standard_normal()
        u = gen.random()
        steps += 1
        hit = -1
        hit_d = math.inf
        pc = 0.0
        for i in range(nb):
            if not active[i]:
                continue
            d0 = A - b[i]
            d1 = An - b[i]
            if d0 * d1 <= 0.0:
                crossed = True
            else:
                pc += math.exp(-2.0 * d0 * d1 / (v * h))
                crossed = u < pc
            if crossed:
                if absorbing[i]:
                    if abs(d0) < hit_d:
                        hit = i
                        hit_d = abs(d0)
                else:
                    active[i] = False
        t += h
        if hit >= 0:
            return b[hit], t, hit, steps
        A = An


@njit(cache=True)
def kendall_kernel(gen, R0, A0, k, kappa, eps, eta, delta_R, dt, T_max,
                   wrapped, restart, R_restart, w_step, c_fd, fd_res, record):
    sk = math.sqrt(k)
    ceil_R = math.pi / sk - eta
    R = R0
    A = A0
    t = 0.0
    switches = 0
    restarts = 0
    n_steps = 0
    max_refl_w = 0.0
    max_enter_fd = 0.0
    max_enter_refl = 0.0
    sign_viol = 0
    fd_time = 0.0
    outcome = -1

    cap = 4096 if record else 1
    rt = np.empty(cap)
    rR = np.empty(cap)
    rA = np.empty(cap)
    rW = np.empty(cap)
    rm = np.empty(cap, dtype=np.int64)
    rs = np.empty(cap, dtype=np.int64)
    nrec = 0

    b = np.empty(3)
    absorbing = np.zeros(3, dtype=np.bool_)

    Aw = wrap4pi(A) if wrapped else A
    if R <= delta_R and abs(Aw) <= kappa * delta_R * delta_R:
        outcome = OUT_COUPLED
        mode = MODE_REFLECTION
    elif R >= ceil_R:
        mode = MODE_SYNC
    elif A != 0.0 and not (wrapped and Aw == 0.0):
        mode = MODE_ZEROING
    else:
        mode = MODE_REFLECTION

    while outcome < 0:
        if record:
            if nrec == rt.shape[0]:
                rt = _grow(rt, nrec)
                rR = _grow(rR, nrec)
                rA = _grow(rA, nrec)
                rW = _grow(rW, nrec)
                rm = _grow(rm, nrec)
                rs = _grow(rs, nrec)
            Aw = wrap4pi(A) if wrapped else A
            rt[nrec] = t
            rR[nrec] = R
            rA[nrec] = A
            rW[nrec] = Aw / (R * R)
            rm[nrec] = mode
            rs[nrec] = switches
            nrec += 1
        if t >= T_max:
            outcome = OUT_TIMED_OUT
            break

        if mode == MODE_REFLECTION:
            Aw = wrap4pi(A) if wrapped else A
            W = Aw / (R * R)
            tn = math.tan(sk * R / 2.0)
            af = tn / sk
            R2 = R * R
            qvw = 4.0 * af * af / (R2 * R2) + 16.0 * W * W / R2
            h = w_step * w_step / qvw
            if h > dt:
                h = dt
            if h > T_max - t:
                h = T_max - t
            sq = math.sqrt(h)
            dU1 = sq * gen.standard_normal()
            dU2 = sq * gen.standard_normal()
            Rn = R - 2.0 * dU1 - sk * tn * h
            if Rn < 0.0:
                Rn = -Rn
            A = A + 2.0 * af * dU2
            R = Rn
            t += h
            n_steps += 1
            Aw = wrap4pi(A) if wrapped else A
            W = abs(Aw) / (R * R)
            if W > max_refl_w:
                max_refl_w = W
            if R <= delta_R and abs(Aw) <= kappa * delta_R * delta_R:
                outcome = OUT_COUPLED
            elif R >= ceil_R:
                if restart:
                    mode = MODE_SYNC
                else:
                    outcome = OUT_HIT_ETA
            elif W >= kappa:
                dev = W - kappa
                if dev > max_enter_fd:
                    max_enter_fd = dev
                switches += 1
                mode = MODE_FIXED

        elif mode == MODE_FIXED:
            Aw = wrap4pi(A) if wrapped else A
            sgn = 1.0 if Aw > 0.0 else -1.0
            R2 = R * R
            target = (kappa - eps) * R2
            b[0] = A - sgn * (abs(Aw) - target)
            b[1] = A + sgn * (FOUR_PI - abs(Aw) - target)
            absorbing[0] = True
            absorbing[1] = wrapped
            v = 4.0 / k * math.sin(sk * R / 2.0) ** 2
            h_min = (fd_res * eps * R2) ** 2 / v
            t0 = t
            A, t, hit, st = _fd_run(gen, A, t, v, b, absorbing, 2, T_max, h_min, c_fd)
            n_steps += st
            fd_time += t - t0
            if hit < 0:
                outcome = OUT_TIMED_OUT
            else:
                Aw = wrap4pi(A) if wrapped else A
                dev = abs(abs(Aw) / R2 - (kappa - eps))
                if dev > max_enter_refl:
                    max_enter_refl = dev
                if not wrapped and (Aw > 0.0) != (sgn > 0.0):
                    sign_viol += 1
                switches += 1
                mode = MODE_REFLECTION

        elif mode == MODE_SYNC:
            restarts += 1
            Rc = R
            lim = math.pi / sk - 1e-12
            if Rc > lim:
                Rc = lim
            Rt = R_restart
            dur = 2.0 / k * math.log(math.sin(sk * Rc / 2.0) / math.sin(sk * Rt / 2.0))
            if t + dur > T_max:
                rem = T_max - t
                Rt = 2.0 / sk * math.asin(math.exp(-k * rem / 2.0) * math.sin(sk * Rc / 2.0))
                dur = rem
            var = 4.0 / (k * k) * math.log(math.cos(sk * Rt / 2.0) ** 2 / math.cos(sk * Rc / 2.0) ** 2)
            A = A + math.sqrt(var) * gen.standard_normal()
            R = Rt
            t += dur
            n_steps += 1
            mode = MODE_ZEROING

        else:
            # fixed distance until A = 0 (or a multiple of 4pi when wrapped)
            v = 4.0 / k * math.sin(sk * R / 2.0) ** 2
            lo = FOUR_PI * math.floor(A / FOUR_PI)
            b[0] = 0.0
            b[1] = lo
            b[2] = lo + FOUR_PI
            absorbing[0] = True
            absorbing[1] = wrapped
            absorbing[2] = wrapped
            if A == 0.0 or (wrapped and A == lo):
                hit = 0
            else:
                h_min = (fd_res * eps * R * R) ** 2 / v
                t0 = t
                A, t, hit, st = _fd_run(gen, A, t, v, b, absorbing, 3, T_max, h_min, c_fd)
                n_steps += st
                fd_time += t - t0
            if hit < 0:
                outcome = OUT_TIMED_OUT
            else:
                mode = MODE_REFLECTION
                Aw = wrap4pi(A) if wrapped else A
                if R <= delta_R and abs(Aw) <= kappa * delta_R * delta_R:
                    outcome = OUT_COUPLED

    if t > T_max:
        t = T_max
    if record:
        if nrec == rt.shape[0]:
            rt = _grow(rt, nrec)
            rR = _grow(rR, nrec)
            rA = _grow(rA, nrec)
            rW = _grow(rW, nrec)
            rm = _grow(rm, nrec)
            rs = _grow(rs, nrec)
        Aw = wrap4pi(A) if wrapped else A
        rt[nrec] = t
        rR[nrec] = R
        rA[nrec] = A
        rW[nrec] = Aw / (R * R)
        rm[nrec] = mode
        rs[nrec] = switches
        nrec += 1
    stats = np.array([max_refl_w, max_enter_fd, max_enter_refl, fd_time])
    counts = np.array([switches, restarts, n_steps, sign_viol], dtype=np.int64)
    return (outcome, t, R, A, stats, counts,
            rt[:nrec], rR[:nrec], rA[:nrec], rW[:nrec], rm[:nrec], rs[:nrec])
