"""Compiled collapsed Gibbs sweep.

Uniform variates are drawn by the caller so that all randomness stays in
one numpy ``Generator`` and runs are reproducible bit for bit.
"""
import numba
import numpy as np


@numba.njit(cache=True)
def sweep(z, tok_doc, tok_skill, doc_topics, doc_topic_ptr,
          n_sk, n_k, n_mk, alpha, beta, beta_sum, uniforms):
    # the per-document category factor is constant in the topic, so it is omitted
    buf = np.empty(n_k.shape[0])
    for t in range(z.shape[0]):
        m = tok_doc[t]
        w = tok_skill[t]
        old = z[t]
        n_sk[w, old] -= 1
        n_k[old] -= 1
        n_mk[m, old] -= 1

        lo = doc_topic_ptr[m]
        hi = doc_topic_ptr[m + 1]
        total = 0.0
        for a in range(lo, hi):
            j = doc_topics[a]
            total += (n_sk[w, j] + beta) / (n_k[j] + beta_sum) * (n_mk[m, j] + alpha)
            buf[a - lo] = total
        target = uniforms[t] * total
        new = doc_topics[hi - 1]
        for a in range(lo, hi):
            if target < buf[a - lo]:
                new = doc_topics[a]
                break

        z[t] = new
        n_sk[w, new] += 1
        n_k[new] += 1
        n_mk[m, new] += 1
