# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; drop-in twin of ``_kernels_py``."""
from libc.math cimport exp, fabs, sqrt, pow
from libc.stdlib cimport malloc, free

import numpy as np

BACKEND = "cython"


cdef inline double _tanh(double x) nogil:
    # exp-based form is markedly cheaper than libm tanh and accurate to a few ulp
    cdef double t = exp(-2.0 * fabs(x))
    cdef double r = (1.0 - t) / (1.0 + t)
    return r if x >= 0.0 else -r


def qsnn_loss_grad(const double[:, ::1] inputs, const double[::1] lengths,
                   const double[::1] taus,
                   const double[:, ::1] w1, const double[::1] b1,
                   const double[:, ::1] w2, const double[::1] b2,
                   double l2, bint relu,
                   double[:, ::1] g_w1, double[::1] g_b1,
                   double[:, ::1] g_w2, double[::1] g_b2):
    cdef Py_ssize_t n = inputs.shape[0], nin = inputs.shape[1]
    cdef Py_ssize_t nh = w1.shape[1], nl = w2.shape[1]
    cdef Py_ssize_t i, j, k, l
    cdef double loss = 0.0, acc, d, g, r
    cdef double *h = <double *> malloc(nh * sizeof(double))
    cdef double *dact = <double *> malloc(nh * sizeof(double))
    cdef double *gout = <double *> malloc(nl * sizeof(double))
    cdef double *out = <double *> malloc(nl * sizeof(double))
    if h == NULL or dact == NULL or gout == NULL or out == NULL:
        free(h); free(dact); free(gout); free(out)
        raise MemoryError()
    try:
        g_w1[:, :] = 0.0
        g_b1[:] = 0.0
        g_w2[:, :] = 0.0
        g_b2[:] = 0.0
        for i in range(n):
            for j in range(nh):
                acc = b1[j]
                for k in range(nin):
                    acc += inputs[i, k] * w1[k, j]
                if relu:
                    if acc > 0.0:
                        h[j] = acc
                        dact[j] = 1.0
                    else:
                        h[j] = 0.0
                        dact[j] = 0.0
                else:
                    h[j] = _tanh(acc)
                    dact[j] = 1.0 - h[j] * h[j]
            r = lengths[i]
            for l in range(nl):
                out[l] = b2[l]
            for j in range(nh):
                for l in range(nl):
                    out[l] += h[j] * w2[j, l]
            for l in range(nl):
                d = out[l] - r
                # overprediction slope 1 - tau, underprediction -tau
                g = <double> (d >= 0.0) - taus[l]
                loss += d * g
                gout[l] = g
                g_b2[l] += g
            for j in range(nh):
                acc = 0.0
                for l in range(nl):
                    g_w2[j, l] += h[j] * gout[l]
                    acc += gout[l] * w2[j, l]
                acc *= dact[j]
                g_b1[j] += acc
                for k in range(nin):
                    g_w1[k, j] += inputs[i, k] * acc
        acc = 0.0
        for k in range(nin):
            for j in range(nh):
                acc += w1[k, j] * w1[k, j]
                g_w1[k, j] += 2.0 * l2 * w1[k, j]
        for j in range(nh):
            for l in range(nl):
                acc += w2[j, l] * w2[j, l]
                g_w2[j, l] += 2.0 * l2 * w2[j, l]
        loss += l2 * acc
    finally:
        free(h)
        free(dact)
        free(gout)
        free(out)
    return loss


def adam_update(double[::1] params, const double[::1] grads, double[::1] m,
                double[::1] v, long step, double lr, double beta1, double beta2,
                double eps):
    cdef Py_ssize_t i, n = params.shape[0]
    cdef double c1 = 1.0 - pow(beta1, <double> step)
    cdef double c2 = 1.0 - pow(beta2, <double> step)
    cdef double gi
    for i in range(n):
        gi = grads[i]
        m[i] = beta1 * m[i] + (1.0 - beta1) * gi
        v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi
        params[i] -= lr * (m[i] / c1) / (sqrt(v[i] / c2) + eps)


cdef inline double _segment_sq(double width, double p0, double p1) nogil:
    return width * (p0 * p0 + p0 * p1 + p1 * p1) / 3.0


def crps_piecewise(xs_in, ps_in, obs_in):
    cdef const double[:, ::1] xs = np.ascontiguousarray(xs_in, dtype=np.float64)
    cdef const double[:, ::1] ps = np.ascontiguousarray(ps_in, dtype=np.float64)
    cdef const double[::1] obs = np.ascontiguousarray(obs_in, dtype=np.float64)
    cdef Py_ssize_t n = xs.shape[0], na = xs.shape[1], i, k
    out = np.zeros(n)
    cdef double[::1] res = out
    cdef double a, b, p0, p1, o, pm, total
    for i in range(n):
        o = obs[i]
        total = 0.0
        for k in range(na - 1):
            a = xs[i, k]
            b = xs[i, k + 1]
            p0 = ps[i, k]
            p1 = ps[i, k + 1]
            if o >= b:
                total += _segment_sq(b - a, p0, p1)
            elif o <= a:
                total += _segment_sq(b - a, 1.0 - p0, 1.0 - p1)
            else:
                pm = p0 + (p1 - p0) * (o - a) / (b - a)
                total += _segment_sq(o - a, p0, pm)
                total += _segment_sq(b - o, 1.0 - pm, 1.0 - p1)
        if o > xs[i, na - 1]:
            total += o - xs[i, na - 1]
        res[i] = total
    return out
