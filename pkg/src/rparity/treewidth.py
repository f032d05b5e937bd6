"""Tree decompositions, exact treewidth for small graphs, and bounds.

All routines first reduce the input to a simple graph: parallel edges
and self-loops never change treewidth.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import networkx as nx

from .errors import ParseError, TooLarge

DEFAULT_CUTOFF = 24


@dataclass
class TreeDecomposition:
    bags: dict = field(default_factory=dict)  # node -> frozenset of vertices
    edges: list = field(default_factory=list)

    def tree(self) -> nx.Graph:
        t = nx.Graph()
        t.add_nodes_from(self.bags)
        t.add_edges_from(self.edges)
        return t


@dataclass
class TwBounds:
    lower: int
    upper: int
    lower_method: str = ""
    upper_method: str = ""
    witness: Optional[TreeDecomposition] = None

    @property
    def exact(self) -> bool:
        return self.lower == self.upper


def simple_graph(g) -> nx.Graph:
    s = nx.Graph()
    s.add_nodes_from(g.nodes)
    s.add_edges_from((u, v) for u, v in g.edges() if u != v)
    return s


def width(td: TreeDecomposition) -> int:
    return max((len(b) for b in td.bags.values()), default=0) - 1


def validate_decomposition(g, td: TreeDecomposition) -> bool:
    """Tree shape, vertex and edge coverage, connected occurrence subtrees."""
    t = td.tree()
    if t.number_of_nodes() == 0:
        return g.number_of_nodes() == 0
    if not nx.is_tree(t):
        return False
    covered = set().union(*td.bags.values())
    if set(g.nodes) - covered:
        return False
    for u, v in g.edges():
        if u != v and not any(u in b and v in b for b in td.bags.values()):
            return False
    for v in g.nodes:
        holders = [x for x, b in td.bags.items() if v in b]
        if not nx.is_connected(t.subgraph(holders)):
            return False
    return True


def decomposition_from_order(g, order: Sequence) -> TreeDecomposition:
    """Bags ``{v} + later neighbours`` in the filled graph, linked to the
    earliest-eliminated of those neighbours."""
    s = simple_graph(g)
    pos = {v: i for i, v in enumerate(order)}
    adj = {v: set(s[v]) for v in s}
    bags, parent = {}, {}
    for v in order:
        later = adj[v]
        bags[v] = frozenset(later | {v})
        if later:
            parent[v] = min(later, key=pos.get)
        for a in later:
            adj[a] |= later - {a}
            adj[a].discard(v)
    edges = [(v, p) for v, p in parent.items()]
    roots = [v for v in order if v not in parent]
    edges += list(zip(roots, roots[1:]))
    return TreeDecomposition(bags, edges)


def order_width(g, order: Sequence) -> int:
    s = simple_graph(g)
    adj = {v: set(s[v]) for v in s}
    w = -1 if not order else 0
    for v in order:
        nb = adj.pop(v)
        w = max(w, len(nb))
        for a in nb:
            adj[a] |= nb - {a}
            adj[a].discard(v)
    return w


# -- heuristics ------------------------------------------------------------

def upper_bound_minfill(g):
    """Greedy min-fill elimination; returns ``(width, decomposition)``."""
    s = simple_graph(g)
    adj = {v: set(s[v]) for v in s}
    order = []
    key = {v: i for i, v in enumerate(sorted(s.nodes, key=repr))}
    while adj:
        def fill(v):
            nb = list(adj[v])
            return sum(1 for i in range(len(nb)) for j in range(i + 1, len(nb))
                       if nb[j] not in adj[nb[i]])
        v = min(adj, key=lambda x: (fill(x), len(adj[x]), key[x]))
        nb = adj.pop(v)
        for a in nb:
            adj[a] |= nb - {a}
            adj[a].discard(v)
        order.append(v)
    td = decomposition_from_order(s, order)
    return max(width(td), 0) if s.number_of_nodes() else -1, td


def lower_bound_mmd(g) -> int:
    """Minor-min-width: contract a min-degree vertex into its min-degree
    neighbour, tracking the largest minimum degree seen."""
    s = simple_graph(g)
    adj = {v: set(s[v]) for v in s}
    key = {v: i for i, v in enumerate(sorted(s.nodes, key=repr))}
    lb = 0
    while len(adj) > 1:
        v = min(adj, key=lambda x: (len(adj[x]), key[x]))
        lb = max(lb, len(adj[v]))
        if not adj[v]:
            del adj[v]
            continue
        u = min(adj[v], key=lambda x: (len(adj[x]), key[x]))
        for w in adj.pop(v):
            adj[w].discard(v)
            if w != u:
                adj[w].add(u)
                adj[u].add(w)
    return lb


# -- exact -------------------------------------------------------------------

def _component_exact(s: nx.Graph, lower: int):
    nodes = sorted(s.nodes, key=repr)
    n = len(nodes)
    idx = {v: i for i, v in enumerate(nodes)}
    nbr = [0] * n
    for u, v in s.edges():
        nbr[idx[u]] |= 1 << idx[v]
        nbr[idx[v]] |= 1 << idx[u]
    full = (1 << n) - 1

    def q(S, v):
        # vertices outside S + v reachable from v through S
        seen = 1 << v
        frontier = 1 << v
        out = 0
        while frontier:
            b = frontier & -frontier
            frontier ^= b
            i = b.bit_length() - 1
            nb = nbr[i] & ~seen
            seen |= nb
            inner = nb & S
            frontier |= inner
            out |= nb & ~S
        return bin(out).count("1")

    k = max(lower, 0)
    while True:
        # sets S that can be eliminated first with width <= k
        parent = {0: None}
        level = [0]
        done = None
        for _ in range(n):
            nxt = []
            for S in level:
                if n - bin(S).count("1") <= k + 1:
                    done = S
                    break
                rest = full & ~S
                while rest:
                    b = rest & -rest
                    rest ^= b
                    v = b.bit_length() - 1
                    T = S | b
                    if T not in parent and q(S, v) <= k:
                        parent[T] = (S, v)
                        nxt.append(T)
            if done is not None:
                break
            level = nxt
            if not level:
                break
        if done is not None:
            order = []
            S = done
            while parent[S] is not None:
                S, v = parent[S]
                order.append(nodes[v])
            order.reverse()
            order += [nodes[i] for i in range(n) if not done >> i & 1]
            return k, order
        k += 1


def exact_treewidth(g, cutoff: int = DEFAULT_CUTOFF):
    """Exact treewidth by subset dynamic programming over elimination orders.

    Each connected component is solved separately; for increasing k, the
    vertex sets that can be eliminated first within width k are grown
    breadth-first. Returns ``(tw, decomposition)``.
    """
    s = simple_graph(g)
    if s.number_of_nodes() > cutoff:
        raise TooLarge(f"{s.number_of_nodes()} vertices > cutoff {cutoff}")
    if s.number_of_nodes() == 0:
        return -1, TreeDecomposition()
    tw, order = 0, []
    for comp in sorted(nx.connected_components(s), key=lambda c: sorted(map(repr, c))):
        sub = s.subgraph(comp)
        if sub.number_of_nodes() == 1:
            order += list(comp)
            continue
        lb = max(lower_bound_mmd(sub), tw)
        ub, _ = upper_bound_minfill(sub)
        if lb >= ub:
            k, o = ub, list(_minfill_order(sub))
        else:
            k, o = _component_exact(sub, lb)
        tw = max(tw, k)
        order += o
    td = decomposition_from_order(s, order)
    return tw, td


def _minfill_order(s):
    _, td = upper_bound_minfill(s)
    # bags are keyed by vertex in elimination order
    return list(td.bags)


def tw_bounds(g, cutoff: int = DEFAULT_CUTOFF, matching: Optional[Sequence] = None) -> TwBounds:
    """Exact under the cutoff, else min-fill / minor-min-width.

    ``matching`` lists pairs (u, u') whose contraction turns g into the
    multigraph G*; bounds on G* then tighten those of g through
    tw(G*) <= tw(g) <= 2 tw(G*) + 1, the upper side witnessed by doubling
    each bag of a G* decomposition.
    """
    s = simple_graph(g)
    if s.number_of_nodes() <= cutoff:
        tw, td = exact_treewidth(s, cutoff)
        return TwBounds(tw, tw, "exact", "exact", td)
    ub, td = upper_bound_minfill(s)
    lb = lower_bound_mmd(s)
    b = TwBounds(lb, ub, "mmd", "minfill", td)
    if matching:
        star = nx.Graph()
        rep = {}
        for u, v in matching:
            rep[v] = u
        star.add_nodes_from(rep.get(v, v) for v in s.nodes)
        star.add_edges_from((rep.get(u, u), rep.get(v, v)) for u, v in s.edges()
                            if rep.get(u, u) != rep.get(v, v))
        sb = tw_bounds(star, cutoff)
        if sb.lower > b.lower:
            b.lower, b.lower_method = sb.lower, f"star-{sb.lower_method}"
        if 2 * sb.upper + 1 < b.upper:
            back = {}
            for u, v in matching:
                back.setdefault(u, set()).add(v)
            bags = {x: frozenset(set(bag) | {w for a in bag for w in back.get(a, ())})
                    for x, bag in sb.witness.bags.items()}
            b.upper, b.upper_method = 2 * sb.upper + 1, f"star-{sb.upper_method}"
            b.witness = TreeDecomposition(bags, list(sb.witness.edges))
    return b


# -- PACE .td text ---------------------------------------------------------

def write_td(td: TreeDecomposition, num_vertices: int, vertex_ids: dict) -> str:
    """PACE format: ``s td <bags> <width+1> <n>``, ``b i v...``, tree edges."""
    nodes = list(td.bags)
    bid = {x: i for i, x in enumerate(nodes, start=1)}
    out = [f"s td {len(nodes)} {width(td) + 1} {num_vertices}\n"]
    for x in nodes:
        vs = sorted(vertex_ids[v] for v in td.bags[x])
        out.append(" ".join(["b", str(bid[x])] + [str(v) for v in vs]) + "\n")
    for a, b in td.edges:
        out.append(f"{bid[a]} {bid[b]}\n")
    return "".join(out)


def read_td(text: str, vertex_names: Optional[dict] = None) -> TreeDecomposition:
    names = vertex_names or {}
    bags, edges = {}, []
    seen_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        try:
            if parts[0] == "s":
                if parts[1] != "td" or len(parts) != 5:
                    raise ParseError("malformed solution line", lineno)
                seen_header = True
            elif parts[0] == "b":
                bags[int(parts[1])] = frozenset(names.get(int(v), int(v)) for v in parts[2:])
            else:
                edges.append((int(parts[0]), int(parts[1])))
        except (ValueError, IndexError):
            raise ParseError(f"bad line {raw!r}", lineno) from None
    if not seen_header:
        raise ParseError("missing 's td' line")
    return TreeDecomposition(bags, edges)
