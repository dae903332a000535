# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tree and meta-solver kernels.

Same contracts as `cfrpsro._pykernels`. Nodes are stored in pre-order, so a
forward sweep visits parents before children and a backward sweep visits
children before parents.
"""

import numpy as np

from libc.math cimport exp, fabs

cdef enum:
  KIND_TERMINAL = 0
  KIND_CHANCE = 1
  KIND_DECISION = 2

TIE_TOLERANCE = 1e-9


cdef class _Tree:
  cdef Py_ssize_t num_nodes, num_players, num_slots, num_infosets, num_levels
  cdef const signed char[::1] kind
  cdef const int[::1] player
  cdef const int[::1] infoset
  cdef const long long[::1] edge_start
  cdef const int[::1] edge_child
  cdef const double[::1] edge_prob
  cdef const int[::1] edge_slot
  cdef const double[:, ::1] utilities
  cdef const int[::1] infoset_player
  cdef const long long[::1] slot_start
  cdef const int[::1] level_nodes
  cdef const long long[::1] level_node_start
  cdef const int[::1] level_infosets
  cdef const long long[::1] level_infoset_start

  def __init__(self, tree):
    self.num_nodes = tree.num_nodes
    self.num_players = tree.num_players
    self.num_slots = tree.num_slots
    self.num_infosets = tree.num_infosets
    self.num_levels = tree.num_levels
    self.kind = tree.node_kind
    self.player = tree.node_player
    self.infoset = tree.node_infoset
    self.edge_start = tree.edge_start
    self.edge_child = tree.edge_child
    self.edge_prob = tree.edge_prob
    self.edge_slot = tree.edge_slot
    self.utilities = tree.utilities
    self.infoset_player = tree.infoset_player
    self.slot_start = tree.infoset_slot_start
    self.level_nodes = tree.level_nodes
    self.level_node_start = tree.level_node_start
    self.level_infosets = tree.level_infosets
    self.level_infoset_start = tree.level_infoset_start


cdef _Tree _wrap(tree):
  cached = tree.__dict__.get("_ckernel_view")
  if cached is None:
    cached = _Tree(tree)
    tree.__dict__["_ckernel_view"] = cached
  return cached


cdef void _reach(_Tree t, const double[::1] probs, double[:, ::1] r) noexcept nogil:
  cdef Py_ssize_t n, e, c, j, col
  cdef Py_ssize_t width = t.num_players + 1
  cdef double w
  for n in range(t.num_nodes):
    if t.kind[n] == KIND_TERMINAL:
      continue
    col = t.num_players if t.kind[n] == KIND_CHANCE else t.player[n]
    for e in range(t.edge_start[n], t.edge_start[n + 1]):
      c = t.edge_child[e]
      w = t.edge_prob[e] if t.edge_slot[e] < 0 else probs[t.edge_slot[e]]
      for j in range(width):
        r[c, j] = r[n, j]
      r[c, col] *= w


cdef void _values(_Tree t, const double[::1] probs, double[:, ::1] v) noexcept nogil:
  cdef Py_ssize_t n, e, c, j
  cdef double w
  for n in range(t.num_nodes - 1, -1, -1):
    if t.kind[n] == KIND_TERMINAL:
      continue
    for j in range(t.num_players):
      v[n, j] = 0.0
    for e in range(t.edge_start[n], t.edge_start[n + 1]):
      c = t.edge_child[e]
      w = t.edge_prob[e] if t.edge_slot[e] < 0 else probs[t.edge_slot[e]]
      for j in range(t.num_players):
        v[n, j] += w * v[c, j]


def reach_probabilities(tree, const double[::1] probs):
  cdef _Tree t = _wrap(tree)
  reach = np.ones((t.num_nodes, t.num_players + 1))
  cdef double[:, ::1] r = reach
  with nogil:
    _reach(t, probs, r)
  return reach


def node_values(tree, const double[::1] probs):
  cdef _Tree t = _wrap(tree)
  values = np.array(tree.utilities, copy=True)
  cdef double[:, ::1] v = values
  with nogil:
    _values(t, probs, v)
  return values


def cfr_regrets(tree, const double[::1] probs, update):
  cdef _Tree t = _wrap(tree)
  cdef Py_ssize_t n, e, j, i, slot
  cdef double cf
  update_arr = np.ascontiguousarray(update, dtype=np.uint8)
  cdef const unsigned char[::1] upd = update_arr
  reach = np.ones((t.num_nodes, t.num_players + 1))
  values = np.array(tree.utilities, copy=True)
  regrets = np.zeros(t.num_slots)
  cf_reach = np.zeros(t.num_infosets)
  own_reach = np.zeros(t.num_infosets)
  cdef double[:, ::1] r = reach
  cdef double[:, ::1] v = values
  cdef double[::1] reg = regrets
  cdef double[::1] cfr = cf_reach
  cdef double[::1] own = own_reach
  with nogil:
    _reach(t, probs, r)
    _values(t, probs, v)
    for n in range(t.num_nodes):
      if t.kind[n] != KIND_DECISION:
        continue
      i = t.player[n]
      if not upd[i]:
        continue
      cf = 1.0
      for j in range(t.num_players + 1):
        if j != i:
          cf *= r[n, j]
      for e in range(t.edge_start[n], t.edge_start[n + 1]):
        slot = t.edge_slot[e]
        reg[slot] += cf * (v[t.edge_child[e], i] - v[n, i])
      cfr[t.infoset[n]] += cf
      own[t.infoset[n]] = r[n, i]
  return regrets, cf_reach, own_reach


def best_response(tree, const double[::1] probs, Py_ssize_t player):
  cdef _Tree t = _wrap(tree)
  cdef Py_ssize_t lvl, k, n, e, j, slot, idx, s0, s1, s, ties
  cdef double acc, w, best, tol = TIE_TOLERANCE
  reach = np.ones((t.num_nodes, t.num_players + 1))
  cf_arr = np.empty(t.num_nodes)
  q_arr = np.zeros(t.num_slots)
  br_arr = np.array(probs, copy=True)
  v_arr = np.array(tree.utilities[:, player], copy=True)
  cdef double[:, ::1] r = reach
  cdef double[::1] cf = cf_arr
  cdef double[::1] q = q_arr
  cdef double[::1] br = br_arr
  cdef double[::1] v = v_arr
  with nogil:
    _reach(t, probs, r)
    for n in range(t.num_nodes):
      acc = 1.0
      for j in range(t.num_players + 1):
        if j != player:
          acc *= r[n, j]
      cf[n] = acc
    for lvl in range(t.num_levels):
      for k in range(t.level_node_start[lvl], t.level_node_start[lvl + 1]):
        n = t.level_nodes[k]
        if t.kind[n] == KIND_DECISION and t.player[n] == player:
          for e in range(t.edge_start[n], t.edge_start[n + 1]):
            q[t.edge_slot[e]] += cf[n] * v[t.edge_child[e]]
      for k in range(t.level_infoset_start[lvl], t.level_infoset_start[lvl + 1]):
        idx = t.level_infosets[k]
        if t.infoset_player[idx] != player:
          continue
        s0 = t.slot_start[idx]
        s1 = t.slot_start[idx + 1]
        best = q[s0]
        for s in range(s0 + 1, s1):
          if q[s] > best:
            best = q[s]
        ties = 0
        for s in range(s0, s1):
          if q[s] >= best - tol:
            ties += 1
        for s in range(s0, s1):
          br[s] = (1.0 if q[s] >= best - tol else 0.0) / ties
      for k in range(t.level_node_start[lvl], t.level_node_start[lvl + 1]):
        n = t.level_nodes[k]
        if t.kind[n] == KIND_TERMINAL:
          continue
        acc = 0.0
        for e in range(t.edge_start[n], t.edge_start[n + 1]):
          slot = t.edge_slot[e]
          if slot < 0:
            w = t.edge_prob[e]
          elif t.player[n] == player:
            w = br[slot]
          else:
            w = probs[slot]
          acc += w * v[t.edge_child[e]]
        v[n] = acc
  return float(v_arr[0]), br_arr


cdef void _orm_step(const double[::1] payoff, double[::1] strat, double[::1] cum,
                    double[::1] prev, double[::1] avg, Py_ssize_t n, double blend,
                    double temperature, double momentum, bint gain_normalization,
                    double diversity, bint return_average,
                    double[::1] gains, double[::1] centered) noexcept nogil:
  cdef Py_ssize_t k
  cdef double mean = 0.0, top, total, soft, g
  for k in range(n):
    mean += payoff[k]
  mean /= n
  top = 0.0
  for k in range(n):
    centered[k] = payoff[k] - mean
    g = (1.0 + momentum) * centered[k] - momentum * prev[k]
    gains[k] = g + diversity * (1.0 - strat[k])
    if fabs(gains[k]) > top:
      top = fabs(gains[k])
  if gain_normalization and top > 1e-8:
    for k in range(n):
      gains[k] /= top
  total = 0.0
  for k in range(n):
    cum[k] += gains[k]
    if cum[k] < 0.0:
      cum[k] = 0.0
    total += cum[k]
  # gains now holds the ORM strategy, centered keeps the centered payoffs.
  for k in range(n):
    gains[k] = cum[k] / total if total > 1e-12 else 1.0 / n
  top = payoff[0]
  for k in range(1, n):
    if payoff[k] > top:
      top = payoff[k]
  soft = 0.0
  for k in range(n):
    soft += exp((payoff[k] - top) / temperature)
  for k in range(n):
    g = exp((payoff[k] - top) / temperature) / soft if soft > 1e-12 else 1.0 / n
    strat[k] = (1.0 - blend) * gains[k] + blend * g
    prev[k] = centered[k]
    if return_average:
      avg[k] += strat[k]


def hybrid_orm_2p(m0, m1, Py_ssize_t iterations, double blend, double temperature,
                  double momentum, bint gain_normalization, double diversity,
                  bint return_average):
  a0 = np.ascontiguousarray(m0, dtype=np.float64)
  a1 = np.ascontiguousarray(m1, dtype=np.float64)
  cdef const double[:, ::1] M0 = a0
  cdef const double[:, ::1] M1 = a1
  cdef Py_ssize_t n0 = a0.shape[0], n1 = a0.shape[1], it, i, j
  if n0 == 0 or n1 == 0:
    return [np.array([]), np.array([])]
  s0_arr, s1_arr = np.full(n0, 1.0 / n0), np.full(n1, 1.0 / n1)
  c0_arr, c1_arr = np.zeros(n0), np.zeros(n1)
  p0_arr, p1_arr = np.zeros(n0), np.zeros(n1)
  g0_arr, g1_arr = np.zeros(n0), np.zeros(n1)
  a0_arr, a1_arr = np.zeros(n0), np.zeros(n1)
  pay0_arr, pay1_arr = np.zeros(n0), np.zeros(n1)
  cen0_arr, cen1_arr = np.zeros(n0), np.zeros(n1)
  cdef double[::1] s0 = s0_arr, s1 = s1_arr, c0 = c0_arr, c1 = c1_arr
  cdef double[::1] p0 = p0_arr, p1 = p1_arr, g0 = g0_arr, g1 = g1_arr
  cdef double[::1] av0 = a0_arr, av1 = a1_arr, pay0 = pay0_arr, pay1 = pay1_arr
  cdef double[::1] cen0 = cen0_arr, cen1 = cen1_arr
  cdef double acc
  with nogil:
    for it in range(iterations):
      for i in range(n0):
        acc = 0.0
        for j in range(n1):
          acc += M0[i, j] * s1[j]
        pay0[i] = acc
      _orm_step(pay0, s0, c0, p0, av0, n0, blend, temperature, momentum,
                gain_normalization, diversity, return_average, g0, cen0)
      for j in range(n1):
        pay1[j] = 0.0
      for i in range(n0):
        for j in range(n1):
          pay1[j] += s0[i] * M1[i, j]
      _orm_step(pay1, s1, c1, p1, av1, n1, blend, temperature, momentum,
                gain_normalization, diversity, return_average, g1, cen1)
  if not return_average:
    return [s0_arr, s1_arr]
  out = []
  for avg, n in ((a0_arr, n0), (a1_arr, n1)):
    total = avg.sum()
    out.append(avg / total if total > 0 else np.full(n, 1.0 / n))
  return out
