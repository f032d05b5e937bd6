"""Multigraphs behind the parity formulas.

Vertices of the constructed graphs are labelled ``(layer, i)``: layer 0
holds ``i``, layer 1 holds ``i'`` and layer 2 holds ``i''``. Tseitin graphs
of instances use ``(constraint, block)`` labels and store the variable of
each edge as its multigraph key.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

import networkx as nx

from .cnf import CnfFormula, xor_clauses
from .errors import EmptyCore, NotGSigma, NotTseitin, TooLarge, TooSmall
from .parity import EncodedParity, RAddParInstance, RParInstance
from .permute import is_permutation

MAX_ISO_VERTICES = 12


@dataclass
class ChargedGraph:
    graph: nx.MultiGraph
    charge: dict = field(default_factory=dict)

    def edge_var(self) -> dict:
        """Edge ``(u, v, key)`` -> variable; keys are the variables."""
        return {(u, v, k): k for u, v, k in self.graph.edges(keys=True)}

    def total_charge(self) -> int:
        return sum(self.charge.values()) % 2


def _path(g, nodes):
    for u, v in zip(nodes, nodes[1:]):
        g.add_edge(u, v)


def build_g_sigma(n: int, sigma: Sequence[int]) -> nx.MultiGraph:
    """Path 1..n, path sigma(1)'..sigma(n)', and the matching (i, i')."""
    if n < 2:
        raise TooSmall("G_sigma needs n >= 2")
    sigma = tuple(sigma)
    if len(sigma) != n or not is_permutation(sigma):
        raise ValueError(f"sigma is not a permutation of 1..{n}")
    g = nx.MultiGraph()
    g.add_nodes_from((0, i) for i in range(1, n + 1))
    g.add_nodes_from((1, i) for i in range(1, n + 1))
    _path(g, [(0, i) for i in range(1, n + 1)])
    _path(g, [(1, s) for s in sigma])
    for i in range(1, n + 1):
        g.add_edge((0, i), (1, i))
    return g


def contract_edge(g: nx.MultiGraph, u, v) -> nx.MultiGraph:
    """Merge v into u; parallel edges stay, loops are dropped."""
    if not g.has_edge(u, v):
        raise ValueError(f"({u}, {v}) is not an edge")
    h = g.copy()
    for _, w, key, data in g.edges(v, keys=True, data=True):
        if w in (u, v):
            continue
        if h.has_edge(u, w, key):
            h.add_edge(u, w, **data)
        else:
            h.add_edge(u, w, key=key, **data)
    h.remove_node(v)
    return h


def contract_edges(g: nx.MultiGraph, edges):
    """Contract a sequence of edges given by original labels.

    Returns ``(graph, trace)`` where trace lists the contracted edges in
    terms of the then-current representatives.
    """
    rep = {}

    def find(x):
        while x in rep:
            x = rep[x]
        return x

    trace = []
    for a, b in edges:
        u, v = find(a), find(b)
        if u == v:
            continue
        g = contract_edge(g, u, v)
        rep[v] = u
        trace.append((u, v))
    return g, trace


def _check_g_sigma_shape(g):
    layers = Counter(v[0] for v in g.nodes if isinstance(v, tuple))
    n = layers.get(0, 0)
    if set(layers) != {0, 1} or layers[1] != n or g.number_of_nodes() != 2 * n:
        raise NotGSigma("expected two equal layers")
    for i in range(1, n + 1):
        if not g.has_edge((0, i), (1, i)):
            raise NotGSigma(f"matching edge ({i}, {i}') missing")
    return n


def contract_matching(g: nx.MultiGraph) -> nx.MultiGraph:
    """G*_sigma: contract every matching edge (i, i') into vertex i."""
    n = _check_g_sigma_shape(g)
    out, _ = contract_edges(g, [((0, i), (1, i)) for i in range(1, n + 1)])
    return out


def g_star(n: int, sigma: Sequence[int]) -> nx.MultiGraph:
    return contract_matching(build_g_sigma(n, sigma))


# -- Tseitin graphs -------------------------------------------------------

def _encodings(instance):
    if isinstance(instance, (RParInstance, RAddParInstance)):
        return instance.encodings
    return tuple(instance)


def tseitin_graph(instance) -> ChargedGraph:
    """One vertex per xor block, one edge per variable between its two blocks.

    A block's charge is the number of negated literals in it, mod 2.
    """
    g = nx.MultiGraph()
    charge = {}
    where = {}
    for cid, enc in enumerate(_encodings(instance)):
        for bid, block in enumerate(enc.blocks):
            node = (cid, bid)
            g.add_node(node)
            charge[node] = sum(1 for l in block if l < 0) % 2
            for l in block:
                where.setdefault(abs(l), []).append(node)
    for var in sorted(where):
        nodes = where[var]
        if len(nodes) != 2:
            raise NotTseitin(f"variable {var} occurs in {len(nodes)} blocks")
        if nodes[0] == nodes[1]:
            raise NotTseitin(f"variable {var} occurs twice in one block")
        g.add_edge(nodes[0], nodes[1], key=var)
    return ChargedGraph(g, charge)


def tseitin_satisfiable(cg: ChargedGraph) -> bool:
    """Satisfiable iff every connected component has even total charge."""
    for comp in nx.connected_components(cg.graph):
        if sum(cg.charge.get(v, 0) for v in comp) % 2:
            return False
    return True


def tseitin_formula(cg: ChargedGraph) -> CnfFormula:
    """CNF of a charged graph; edge keys must be the variables 1..m."""
    edges = list(cg.graph.edges(keys=True))
    num_vars = max((k for _, _, k in edges), default=0)
    clauses = []
    for v in sorted(cg.graph.nodes):
        vars_ = sorted(k for _, _, k in cg.graph.edges(v, keys=True))
        c = cg.charge.get(v, 0)
        if not vars_:
            if c:
                clauses.append(())
            continue
        lits = list(vars_)
        if c:
            lits[0] = -lits[0]
        clauses.extend(xor_clauses(lits))
    return CnfFormula(num_vars, tuple(clauses))


def random_charged_graph(num_vertices: int, num_edges: int, rng: random.Random) -> ChargedGraph:
    """Random loopless multigraph with edge keys 1..m and random charges."""
    g = nx.MultiGraph()
    g.add_nodes_from(range(num_vertices))
    for var in range(1, num_edges + 1):
        u, v = rng.sample(range(num_vertices), 2)
        g.add_edge(u, v, key=var)
    return ChargedGraph(g, {v: rng.randrange(2) for v in range(num_vertices)})


# -- H and m(H) -----------------------------------------------------------

def build_h(A, B, sigma_a: Sequence[int], sigma_b: Sequence[int],
            sigma_c: Optional[Sequence[int]] = None) -> nx.MultiGraph:
    """Three-layer graph of an rAddPar instance.

    Layers V, V', V'' hold A, B and A^B; paths follow sigma_a, sigma_b and
    sigma_c (increasing order by default); each variable joins the two
    layers it belongs to.
    """
    A, B = frozenset(A), frozenset(B)
    if not A or not B:
        raise ValueError("A and B must be non-empty")
    C = A ^ B
    sigma_c = tuple(sorted(C)) if sigma_c is None else tuple(sigma_c)
    g = nx.MultiGraph()
    for layer, members in ((0, A), (1, B), (2, C)):
        g.add_nodes_from((layer, i) for i in sorted(members))
    _path(g, [(0, i) for i in sigma_a])
    _path(g, [(1, i) for i in sigma_b])
    _path(g, [(2, i) for i in sigma_c])
    for i in sorted(A | B):
        if i in A and i in B:
            g.add_edge((0, i), (1, i))
        elif i in A:
            g.add_edge((0, i), (2, i))
        else:
            g.add_edge((1, i), (2, i))
    return g


def _same_block_pairs(layer: int, enc: EncodedParity) -> list:
    block_of = {}
    for bid, block in enumerate(enc.blocks):
        for l in block:
            block_of[abs(l)] = bid
    ys = enc.inputs
    return [((layer, a), (layer, b)) for a, b in zip(ys, ys[1:])
            if block_of[a] == block_of[b]]


def rpar_contractions(inst: RParInstance) -> list:
    """The four path edges of G_sigma whose ends share an xor block."""
    enc_s, enc_t = inst.encodings
    return _same_block_pairs(0, enc_s) + _same_block_pairs(1, enc_t)


def raddpar_contractions(inst: RAddParInstance) -> list:
    """Path edges of H whose ends share an xor block (six in general)."""
    out = []
    for layer, enc in enumerate((inst.a, inst.b, inst.c)):
        if enc is not None:
            out += _same_block_pairs(layer, enc)
    return out


def _layer_nodes(g, layer):
    return sorted(v for v in g.nodes if v[0] == layer)


def minor_m(h: nx.MultiGraph, rng: Optional[random.Random] = None) -> nx.MultiGraph:
    """Drop V'', then absorb unmatched vertices of V and V' into neighbours.

    An unmatched vertex is merged into its lowest-labelled neighbour, or a
    random one when ``rng`` is given; the neighbour keeps its label.
    """
    g = h.copy()
    g.remove_nodes_from(_layer_nodes(g, 2))
    core = [v for v in _layer_nodes(g, 0) if g.has_edge(v, (1, v[1]))]
    if not core:
        raise EmptyCore("A and B are disjoint")
    for layer in (0, 1):
        other = 1 - layer
        while True:
            loose = [v for v in _layer_nodes(g, layer)
                     if not any(w[0] == other for w in g.neighbors(v))]
            if not loose:
                break
            v = loose[0]
            nbrs = sorted(set(g.neighbors(v)))
            if not nbrs:
                g.remove_node(v)
                continue
            u = rng.choice(nbrs) if rng is not None else nbrs[0]
            g = contract_edge(g, u, v)
    return g


# -- recognition and isomorphism ------------------------------------------

def _perfect_matchings(nodes, adj):
    nodes = sorted(nodes)
    used = set()

    def rec(i, acc):
        while i < len(nodes) and nodes[i] in used:
            i += 1
        if i == len(nodes):
            yield list(acc)
            return
        v = nodes[i]
        used.add(v)
        for w in sorted(adj[v]):
            if w not in used:
                used.add(w)
                acc.append((v, w))
                yield from rec(i + 1, acc)
                acc.pop()
                used.discard(w)
        used.discard(v)

    yield from rec(0, [])


def _as_path(nodes, edges):
    """Order ``nodes`` along a simple path formed exactly by ``edges``, or None."""
    if len(edges) != len(nodes) - 1:
        return None
    if len(nodes) == 1:
        return list(nodes)
    adj = {v: [] for v in nodes}
    for a, b in edges:
        if a not in adj or b not in adj:
            return None
        adj[a].append(b)
        adj[b].append(a)
    ends = [v for v in nodes if len(adj[v]) == 1]
    if len(ends) != 2 or any(len(adj[v]) > 2 for v in nodes):
        return None
    order = [min(ends)]
    prev = None
    while len(order) < len(nodes):
        nxt = [w for w in adj[order[-1]] if w != prev]
        if len(nxt) != 1:
            return None
        prev = order[-1]
        order.append(nxt[0])
    return order


def _canonical_sigma(p1, p2, partner) -> tuple:
    best = None
    for first, second in ((p1, p2), (p2, p1)):
        for f in (first, first[::-1]):
            label = {v: i for i, v in enumerate(f, start=1)}
            for s in (second, second[::-1]):
                sigma = tuple(label[partner[v]] for v in s)
                if best is None or sigma < best:
                    best = sigma
    return best


def recognize_g_sigma(g: nx.MultiGraph) -> Optional[tuple]:
    """Return sigma with g isomorphic to G_sigma, else None.

    sigma is only defined up to reversing either path and exchanging the
    two paths; the lexicographically least representative over all ways of
    reading g as a G_sigma is returned, so the answer depends only on the
    isomorphism class of g.
    """
    nodes = list(g.nodes)
    if len(nodes) % 2 or not nodes:
        return None
    k = len(nodes) // 2
    edges = [(u, v) for u, v in g.edges() if u != v]
    if len(edges) != 3 * k - 2 or len(edges) != g.number_of_edges():
        return None
    counts = Counter(frozenset(e) for e in edges)
    if k > 1 and any(m > 1 for m in counts.values()):
        return None
    index = {v: i for i, v in enumerate(nodes)}
    adj = {i: set() for i in range(len(nodes))}
    for u, v in edges:
        adj[index[u]].add(index[v])
        adj[index[v]].add(index[u])
    best = None
    for matching in _perfect_matchings(range(len(nodes)), adj):
        partner = {}
        for a, b in matching:
            partner[a], partner[b] = b, a
        rest = [(index[u], index[v]) for u, v in edges]
        mset = {frozenset(m) for m in matching}
        rest = [e for e in rest if frozenset(e) not in mset]
        # split the remainder into components; need two paths of k vertices
        comp = nx.Graph()
        comp.add_nodes_from(range(len(nodes)))
        comp.add_edges_from(rest)
        parts = [sorted(c) for c in nx.connected_components(comp)]
        if len(parts) != 2 or len(parts[0]) != k:
            continue
        paths = []
        for part in parts:
            pe = [e for e in rest if e[0] in part]
            paths.append(_as_path(part, pe))
        if None in paths:
            continue
        side = {v: 0 for v in paths[0]}
        if any(partner[v] in side for v in paths[0]):
            continue
        sigma = _canonical_sigma(paths[0], paths[1], partner)
        if best is None or sigma < best:
            best = sigma
    return best


def _multi_adj(g):
    nodes = list(g.nodes)
    idx = {v: i for i, v in enumerate(nodes)}
    m = [[0] * len(nodes) for _ in nodes]
    for u, v in g.edges():
        if u == v:
            m[idx[u]][idx[u]] += 1
        else:
            m[idx[u]][idx[v]] += 1
            m[idx[v]][idx[u]] += 1
    return nodes, m


def isomorphic_small(g1, g2, limit: int = MAX_ISO_VERTICES) -> bool:
    """Exact multigraph isomorphism by backtracking with degree pruning."""
    if g1.number_of_nodes() != g2.number_of_nodes():
        return False
    if g1.number_of_nodes() > limit:
        raise TooLarge(f"{g1.number_of_nodes()} vertices > {limit}")
    if g1.number_of_edges() != g2.number_of_edges():
        return False
    n1, m1 = _multi_adj(g1)
    n2, m2 = _multi_adj(g2)
    deg1 = [sum(r) for r in m1]
    deg2 = [sum(r) for r in m2]
    sig1 = [(deg1[i], tuple(sorted(m1[i]))) for i in range(len(n1))]
    sig2 = [(deg2[i], tuple(sorted(m2[i]))) for i in range(len(n2))]
    if sorted(sig1) != sorted(sig2):
        return False
    # visit g1 vertices in BFS order so consecutive picks stay adjacent
    order, seen = [], set()
    for start in sorted(range(len(n1)), key=lambda i: -deg1[i]):
        if start in seen:
            continue
        seen.add(start)
        queue = [start]
        while queue:
            v = queue.pop(0)
            order.append(v)
            for w in range(len(n1)):
                if m1[v][w] and w not in seen:
                    seen.add(w)
                    queue.append(w)
    mapping = {}
    used = set()

    def rec(t):
        if t == len(order):
            return True
        v = order[t]
        for w in range(len(n2)):
            if w in used or sig2[w] != sig1[v]:
                continue
            if m1[v][v] != m2[w][w]:
                continue
            if any(m1[v][a] != m2[w][b] for a, b in mapping.items()):
                continue
            mapping[v] = w
            used.add(w)
            if rec(t + 1):
                return True
            del mapping[v]
            used.discard(w)
        return False

    return rec(0)


def max_degree(g) -> int:
    return max((d for _, d in g.degree()), default=0)


# -- edge-list text -------------------------------------------------------

def _label(v) -> str:
    return ":".join(map(str, v)) if isinstance(v, tuple) else str(v)


def _unlabel(s: str):
    parts = s.split(":")
    vals = tuple(int(p) for p in parts)
    return vals if len(vals) > 1 else vals[0]


def write_edgelist(g, charge: Optional[dict] = None, name: str = "graph") -> str:
    """Header ``# v <label> <charge>`` per vertex, then one ``u v`` line per edge."""
    charge = charge or {}
    out = [f"# {name} vertices={g.number_of_nodes()} edges={g.number_of_edges()}\n"]
    for v in sorted(g.nodes):
        out.append(f"# v {_label(v)} {charge.get(v, 0)}\n")
    for u, v in sorted((min(e), max(e)) for e in g.edges()):
        out.append(f"{_label(u)} {_label(v)}\n")
    return "".join(out)


def read_edgelist(text: str):
    g = nx.MultiGraph()
    charge = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 3 and parts[0] == "v":
                v = _unlabel(parts[1])
                g.add_node(v)
                charge[v] = int(parts[2])
            continue
        u, v = line.split()
        g.add_edge(_unlabel(u), _unlabel(v))
    return g, charge
