# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; mirror ``_purepy`` operation for operation."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log1p, log

cnp.import_array()

cdef double _LN2 = log(2.0)


cdef Py_ssize_t _gather_sorted(const cnp.int64_t[:] gamma, const double[:] key,
                               cnp.int64_t channel, Py_ssize_t* buf) noexcept nogil:
    """Fill ``buf`` with users on ``channel``: descending key, ascending index on ties."""
    cdef Py_ssize_t n, k = 0, i
    for n in range(gamma.shape[0]):
        if gamma[n] == channel:
            # insertion keeps earlier (smaller) indices ahead on equal keys
            i = k
            while i > 0 and key[buf[i - 1]] < key[n]:
                buf[i] = buf[i - 1]
                i -= 1
            buf[i] = n
            k += 1
    return k


def ul_rates(gamma, ul_power, power_gain, bandwidth, double noise_mc):
    cdef const cnp.int64_t[:] g = np.ascontiguousarray(gamma, dtype=np.int64)
    cdef const double[:] p = np.ascontiguousarray(ul_power, dtype=np.float64)
    cdef const double[:, :] h2 = np.ascontiguousarray(power_gain, dtype=np.float64)
    cdef const double[:] bw = np.ascontiguousarray(bandwidth, dtype=np.float64)
    cdef Py_ssize_t n_users = h2.shape[0], n_ch = h2.shape[1]
    out_arr = np.zeros(n_users)
    cdef double[:] out = out_arr
    cdef double[:] received = np.empty(n_users)
    cdef Py_ssize_t[:] order = np.empty(n_users, dtype=np.intp)
    cdef Py_ssize_t m, col, n, k, pos
    cdef double w, floor, interf, sinr
    with nogil:
        for m in range(1, n_ch + 1):
            col = m - 1
            for n in range(n_users):
                received[n] = p[n] * h2[n, col]
            k = _gather_sorted(g, received, m, &order[0])
            if k == 0:
                continue
            w = bw[col]
            floor = w * noise_mc
            interf = 0.0
            pos = k - 1
            while pos >= 0:
                n = order[pos]
                sinr = received[n] / (interf + floor)
                out[n] = w * (log1p(sinr) / _LN2)
                interf = interf + received[n]
                pos -= 1
    return out_arr


def dl_rates(gamma, dl_power, power_gain, bandwidth, noise_xu):
    cdef const cnp.int64_t[:] g = np.ascontiguousarray(gamma, dtype=np.int64)
    cdef const double[:] p = np.ascontiguousarray(dl_power, dtype=np.float64)
    cdef const double[:, :] h2 = np.ascontiguousarray(power_gain, dtype=np.float64)
    cdef const double[:] bw = np.ascontiguousarray(bandwidth, dtype=np.float64)
    cdef const double[:, :] nz = np.ascontiguousarray(noise_xu, dtype=np.float64)
    cdef Py_ssize_t n_users = h2.shape[0], n_ch = h2.shape[1]
    out_arr = np.zeros(n_users)
    cdef double[:] out = out_arr
    cdef double[:] cnr = np.empty(n_users)
    cdef Py_ssize_t[:] order = np.empty(n_users, dtype=np.intp)
    cdef Py_ssize_t m, col, n, k, pos
    cdef double w, stronger, sinr, gain
    with nogil:
        for m in range(1, n_ch + 1):
            col = m - 1
            for n in range(n_users):
                cnr[n] = h2[n, col] / nz[n, col]
            k = _gather_sorted(g, cnr, m, &order[0])
            if k == 0:
                continue
            w = bw[col]
            stronger = 0.0
            for pos in range(k):
                n = order[pos]
                gain = h2[n, col]
                sinr = p[n] * gain / (stronger * gain + w * nz[n, col])
                out[n] = w * (log1p(sinr) / _LN2)
                stronger = stronger + p[n]
    return out_arr


def gae(rewards, values, next_values, dones, double gamma, double lam):
    cdef const double[:] r = np.ascontiguousarray(rewards, dtype=np.float64)
    cdef const double[:] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef const double[:] nv = np.ascontiguousarray(next_values, dtype=np.float64)
    cdef const cnp.uint8_t[:] d = np.ascontiguousarray(dones, dtype=np.uint8)
    cdef Py_ssize_t T = r.shape[0], t
    adv_arr = np.zeros(T)
    cdef double[:] adv = adv_arr
    cdef double last = 0.0, notdone, delta
    with nogil:
        t = T - 1
        while t >= 0:
            notdone = 0.0 if d[t] else 1.0
            delta = r[t] + gamma * nv[t] * notdone - v[t]
            last = delta + gamma * lam * notdone * last
            adv[t] = last
            t -= 1
    return adv_arr
