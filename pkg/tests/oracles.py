"""Brute-force reference implementations of every agreement statistic.

Each function is written directly from the statistic's definition with
plain loops and dictionaries: no numpy, no imports from the package under
test, no shared helpers. They return ``None`` where the statistic is
undefined, following the same documented degeneracy rules as the package
(constant raters, single observed category, degenerate ICC denominator).
"""
from __future__ import annotations


def oracle_cohen_kappa(a, b):
    a, b = list(a), list(b)
    n = len(a)
    if len(set(a)) == 1 and len(set(b)) == 1 and a[0] == b[0]:
        return None
    p_o = sum(1 for i in range(n) if a[i] == b[i]) / n
    p_e = 0.0
    for c in set(a) | set(b):
        p_e += (a.count(c) / n) * (b.count(c) / n)
    return (p_o - p_e) / (1 - p_e)


def oracle_gwet_ac1(rows, categories=None):
    rows = [list(r) for r in rows]
    if categories is not None:
        cats = list(categories)
    else:
        cats = []
        for row in rows:
            for v in row:
                if v is not None and v not in cats:
                    cats.append(v)
    q = len(cats)
    p_o_total = 0.0
    for row in rows:
        vals = [v for v in row if v is not None]
        m = len(vals)
        matches = sum(1 for i in range(m) for j in range(m)
                      if i != j and vals[i] == vals[j])
        p_o_total += matches / (m * (m - 1))
    p_o = p_o_total / len(rows)
    if q <= 1:
        return 1.0
    p_e = 0.0
    for c in cats:
        pi_total = 0.0
        for row in rows:
            vals = [v for v in row if v is not None]
            pi_total += sum(1 for v in vals if v == c) / len(vals)
        pi = pi_total / len(rows)
        p_e += pi * (1 - pi)
    p_e /= q - 1
    return (p_o - p_e) / (1 - p_e)


def oracle_fleiss_kappa(rows):
    rows = [list(r) for r in rows]
    big_n = len(rows)
    n = len(rows[0])
    cats = []
    for row in rows:
        for v in row:
            if v not in cats:
                cats.append(v)
    if len(cats) <= 1:
        return None
    p_bar = 0.0
    for row in rows:
        agree = sum(row.count(c) * (row.count(c) - 1) for c in cats)
        p_bar += agree / (n * (n - 1))
    p_bar /= big_n
    p_e = 0.0
    for c in cats:
        p_c = sum(row.count(c) for row in rows) / (big_n * n)
        p_e += p_c * p_c
    return (p_bar - p_e) / (1 - p_e)


def oracle_krippendorff_alpha(rows):
    units = [[v for v in row if v is not None] for row in rows]
    units = [u for u in units if len(u) >= 2]
    cats = []
    for u in units:
        for v in u:
            if v not in cats:
                cats.append(v)
    if len(cats) <= 1:
        return None
    o = {(c, k): 0.0 for c in cats for k in cats}
    for u in units:
        m = len(u)
        for i in range(m):
            for j in range(m):
                if i != j:
                    o[(u[i], u[j])] += 1.0 / (m - 1)
    n_c = {c: sum(o[(c, k)] for k in cats) for c in cats}
    n = sum(n_c.values())
    d_o = sum(o[(c, k)] for c in cats for k in cats if c != k) / n
    d_e = sum(n_c[c] * n_c[k] for c in cats for k in cats if c != k) \
        / (n * (n - 1))
    return 1 - d_o / d_e


def oracle_pearson_r(x, y):
    x, y = [float(v) for v in x], [float(v) for v in y]
    n = len(x)
    if len(set(x)) == 1 or len(set(y)) == 1:
        return None
    mx = sum(x) / n
    my = sum(y) / n
    cov = sum((x[i] - mx) * (y[i] - my) for i in range(n))
    vx = sum((v - mx) ** 2 for v in x)
    vy = sum((v - my) ** 2 for v in y)
    return cov / (vx * vy) ** 0.5


def _oracle_ranks(values):
    ordered = sorted(values)
    rank_of = {}
    for v in set(values):
        positions = [i + 1 for i, s in enumerate(ordered) if s == v]
        rank_of[v] = sum(positions) / len(positions)
    return [rank_of[v] for v in values]


def oracle_spearman_rho(x, y):
    x, y = [float(v) for v in x], [float(v) for v in y]
    if len(set(x)) == 1 or len(set(y)) == 1:
        return None
    return oracle_pearson_r(_oracle_ranks(x), _oracle_ranks(y))


def oracle_icc_2_1(rows):
    rows = [[float(v) for v in row] for row in rows]
    n = len(rows)
    k = len(rows[0])
    grand = sum(v for row in rows for v in row) / (n * k)
    row_means = [sum(row) / k for row in rows]
    col_means = [sum(rows[i][j] for i in range(n)) / n for j in range(k)]
    ss_rows = k * sum((m - grand) ** 2 for m in row_means)
    ss_cols = n * sum((m - grand) ** 2 for m in col_means)
    ss_total = sum((v - grand) ** 2 for row in rows for v in row)
    ms_rows = ss_rows / (n - 1)
    ms_cols = ss_cols / (k - 1)
    ms_error = (ss_total - ss_rows - ss_cols) / ((n - 1) * (k - 1))
    denominator = ms_rows + (k - 1) * ms_error + k * (ms_cols - ms_error) / n
    if abs(denominator) < 1e-9:
        return None
    return (ms_rows - ms_error) / denominator


def oracle_tolerance(x, y, t):
    hits = sum(1 for a, b in zip(x, y) if abs(a - b) <= t)
    return hits / len(x)


def oracle_tolerance_multi(rows, t):
    k = len(rows[0])
    values = []
    for i in range(k):
        for j in range(i + 1, k):
            values.append(oracle_tolerance([r[i] for r in rows],
                                           [r[j] for r in rows], t))
    return sum(values) / len(values)


def oracle_unanimity(rows):
    return sum(1 for row in rows if all(v == row[0] for v in row)) / len(rows)
