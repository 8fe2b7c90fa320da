# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Hot kernel: trie-constrained beam search with the default mixture model.

Operates on the flattened integer form produced by synkw._encode. The
arithmetic mirrors DefaultScoringModel exactly (same operation order on
doubles) so the compiled and pure backends rank identically.
"""

from libc.math cimport log


cdef double _lm_count(const int[::1] lm_tok, const double[::1] lm_cnt,
                      Py_ssize_t lo, Py_ssize_t hi, int t) nogil:
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if lm_tok[mid] < t:
            lo = mid + 1
        elif lm_tok[mid] > t:
            hi = mid
        else:
            return lm_cnt[mid]
    return 0.0


def decode(const long long[::1] child_start,
           const int[::1] child_tok,
           const int[::1] child_node,
           const unsigned char[::1] terminal,
           const long long[::1] lm_start,
           const int[::1] lm_tok,
           const double[::1] lm_cnt,
           const double[::1] eos_cnt,
           const double[::1] totals,
           double k,
           double outcomes,
           const double[::1] plex,
           double alpha,
           double eps_lex,
           int beam_size,
           int max_length,
           int bos_row):
    """Return the completed pool as a list of (score, token-id tuple)."""
    cdef int step, node, h, t
    cdef Py_ssize_t i, c0, c1, l0, l1
    cdef double score, dn, plm, sc, one_minus_alpha = 1.0 - alpha

    live = [(0.0, (), 0, bos_row)]
    completed = []
    for step in range(max_length + 1):
        if not live:
            break
        expansions = []
        for item in live:
            score = item[0]
            seq = item[1]
            node = item[2]
            h = item[3]
            c0 = child_start[node]
            c1 = child_start[node + 1]
            dn = totals[h] + k * outcomes
            if terminal[node]:
                plm = (eos_cnt[h] + k) / dn
                completed.append((score + log(alpha * plm + one_minus_alpha * eps_lex), seq))
            if len(seq) < max_length and c1 > c0:
                l0 = lm_start[h]
                l1 = lm_start[h + 1]
                for i in range(c0, c1):
                    t = child_tok[i]
                    plm = (_lm_count(lm_tok, lm_cnt, l0, l1, t) + k) / dn
                    sc = log(alpha * plm + one_minus_alpha * plex[t])
                    expansions.append((score + sc, seq + (t,), child_node[i], t))
        expansions.sort(key=_order)
        live = expansions[:beam_size]
    return completed


def _order(e):
    return (-e[0], e[1])
