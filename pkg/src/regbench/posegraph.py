"""Multi-way registration: spatiotemporal pose graphs, MST odometry
initialization, robust optimization with line-process edge pruning, and
global evaluation.

Conventions: node poses map fragment-local points into the area frame; an
edge (i, j, t) stores the pairwise estimate with x_j = t(x_i), so a
consistent graph satisfies t = T_j^-1 . T_i.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import RigidTransform, compose, transform_exp, transform_log
from .metrics import (
    DEFAULT_RRE_MAX,
    DEFAULT_RTE_MAX,
    global_rmse,
    pairwise_rmse,
    registration_recall,
    relative_errors,
)

logger = logging.getLogger(__name__)

MU_FLOOR_DIVISOR = 64.0  # line-process kernel anneals from scale^2 down to scale^2/64


@dataclass(frozen=True)
class PairwiseEstimate:
    """One pairwise registration result feeding the graph."""

    source: str
    target: str
    transform: RigidTransform
    weight: float = 1.0          # matchability score in [0, 1]
    overlap: float = 1.0
    same_stage: bool = True

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError("edge weight out of [0, 1]")


@dataclass(frozen=True)
class Edge:
    i: str
    j: str
    transform: RigidTransform    # x_j = transform(x_i)
    weight: float
    kind: str = "loop"           # "odometry" | "loop"
    constrained: bool = False
    same_stage: bool = True


@dataclass
class PoseGraph:
    poses: dict                  # node id -> RigidTransform (area frame)
    edges: list                  # of Edge

    def __post_init__(self):
        seen = set()
        for e in self.edges:
            if e.i == e.j:
                raise ValueError("self-edge in pose graph")
            key = (min(e.i, e.j), max(e.i, e.j))
            if key in seen:
                raise ValueError("duplicate edge in pose graph")
            seen.add(key)
            if e.i not in self.poses or e.j not in self.poses:
                raise ValueError("edge references unknown node")

    @property
    def node_ids(self):
        return sorted(self.poses)

    def is_connected(self) -> bool:
        return len(_components(self.node_ids, self.edges)) <= 1


@dataclass(frozen=True)
class OptimizerConfig:
    prune_threshold: float = 0.25
    max_outer_iterations: int = 30
    robust_kernel_scale: float = 1.0   # m; mu starts at scale^2
    convergence_eps: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.prune_threshold < 1.0:
            raise ValueError("prune_threshold must be in (0, 1)")
        if self.max_outer_iterations < 1 or self.robust_kernel_scale <= 0 \
                or self.convergence_eps <= 0:
            raise ValueError("optimizer parameters must be positive")


def _components(node_ids, edges):
    parent = {n: n for n in node_ids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edges:
        a, b = find(e.i), find(e.j)
        if a != b:
            parent[a] = b
    groups = {}
    for n in node_ids:
        groups.setdefault(find(n), []).append(n)
    return sorted(groups.values(), key=lambda g: (-len(g), g[0]))


def build_pose_graph(pairwise_results, fragment_ids, min_overlap: float = 0.1,
                     min_component_size: int = 1) -> list:
    """One connected PoseGraph per component of the thresholded estimate set.

    Edges below `min_overlap` are discarded; of duplicate estimates for one
    unordered pair the highest-weight survives. Components smaller than
    `min_component_size` are dropped with a log line. Node poses start at
    identity until odometry initialization.
    """
    fragment_ids = sorted(fragment_ids)
    best = {}
    for est in pairwise_results:
        if est.overlap < min_overlap or est.source == est.target:
            continue
        key = (min(est.source, est.target), max(est.source, est.target))
        if key not in best or est.weight > best[key].weight:
            best[key] = est
    if not best:
        raise ValueError("graph empty")

    edges = []
    for key in sorted(best):
        est = best[key]
        edges.append(Edge(est.source, est.target, est.transform, est.weight,
                          kind="loop", constrained=est.same_stage,
                          same_stage=est.same_stage))

    graphs = []
    for group in _components(fragment_ids, edges):
        if len(group) < min_component_size:
            logger.info("dropping component with %d fragments (< %d)",
                        len(group), min_component_size)
            continue
        members = set(group)
        sub_edges = [e for e in edges if e.i in members and e.j in members]
        if len(group) > 1 and not sub_edges:
            continue
        if len(group) == 1 and min_component_size > 1:
            continue
        graphs.append(PoseGraph({n: RigidTransform.identity() for n in group}, sub_edges))
    if not graphs:
        raise ValueError("graph empty")
    return graphs


def select_odometry_edges(graph: PoseGraph, seed: int = 0) -> PoseGraph:
    """Mark a minimum spanning tree (cost 1 - weight) as odometry and chain
    initial node poses from a seeded random root."""
    nodes = graph.node_ids
    rng = np.random.default_rng(seed)
    root = nodes[int(rng.integers(len(nodes)))]

    # Kruskal with deterministic tie-breaks
    order = sorted(range(len(graph.edges)),
                   key=lambda k: (1.0 - graph.edges[k].weight,
                                  min(graph.edges[k].i, graph.edges[k].j),
                                  max(graph.edges[k].i, graph.edges[k].j)))
    parent = {n: n for n in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    in_tree = set()
    for k in order:
        e = graph.edges[k]
        a, b = find(e.i), find(e.j)
        if a != b:
            parent[a] = b
            in_tree.add(k)
    if len(in_tree) != len(nodes) - 1:
        raise ValueError("graph is not connected")

    edges = [replace(e, kind="odometry" if k in in_tree else "loop")
             for k, e in enumerate(graph.edges)]

    # chain poses over the tree
    adjacency = {n: [] for n in nodes}
    for k in in_tree:
        e = graph.edges[k]
        adjacency[e.i].append((e.j, e.transform, True))    # x_j = t(x_i)
        adjacency[e.j].append((e.i, e.transform, False))
    poses = {root: RigidTransform.identity()}
    stack = [root]
    while stack:
        current = stack.pop()
        for neighbor, t, forward in adjacency[current]:
            if neighbor in poses:
                continue
            if forward:
                # t = T_j^-1 T_i with i=current: T_j = T_i . t^-1
                poses[neighbor] = compose(poses[current], t.inverse())
            else:
                poses[neighbor] = compose(poses[current], t)
            stack.append(neighbor)
    return PoseGraph(poses, edges)


def _edge_residual(t_inv: RigidTransform, pose_i: RigidTransform,
                   pose_j: RigidTransform) -> np.ndarray:
    return transform_log(compose(t_inv, compose(pose_j.inverse(), pose_i)))


def _objective(edges, poses, line, mu, t_invs):
    total = 0.0
    for e, l, t_inv in zip(edges, line, t_invs):
        r = _edge_residual(t_inv, poses[e.i], poses[e.j])
        total += e.weight * (l * float(r @ r) + mu * (np.sqrt(l) - 1.0) ** 2)
    return total


def optimize_graph(graph: PoseGraph, cfg: OptimizerConfig = OptimizerConfig()):
    """Robust pose-graph optimization with line-process pruning.

    Outer iterations alternate (a) one damped Gauss-Newton step on node poses
    under fixed per-edge line weights (steps that would raise the weighted
    cost are rejected, so the recorded objective never increases), (b) the
    closed-form line-weight update l = (mu / (mu + |r|^2))^2 with mu halved
    down to scale^2/64, and (c) pruning of unconstrained loop edges whose
    weight fell below the threshold. Pruning waits until mu reaches its floor:
    while the kernel is still annealing, a large residual may just be an
    unconverged inlier. Odometry and constrained edges are never pruned.
    Raises if pruning disconnects the graph.

    Returns (poses, pruned_edges, objective_trace).
    """
    nodes = graph.node_ids
    index = {n: k for k, n in enumerate(nodes)}
    poses = {n: graph.poses[n] for n in nodes}
    edges = list(graph.edges)
    t_invs = [e.transform.inverse() for e in edges]
    line = np.ones(len(edges))
    # Graduated kernel: start mu at the scale of the worst initial residual
    # (so nothing real is pruned off a drifted initialization) and anneal
    # toward scale^2/64 where only true outliers keep large residuals.
    mu_floor = cfg.robust_kernel_scale ** 2 / MU_FLOOR_DIVISOR
    worst = max((float(np.sum(_edge_residual(t_inv, poses[e.i], poses[e.j]) ** 2))
                 for e, t_inv in zip(edges, t_invs)), default=0.0)
    mu = max(cfg.robust_kernel_scale ** 2, 4.0 * worst)
    root = nodes[0]
    pruned = []
    trace = []
    lm_lambda = 1e-6
    h = 1e-6

    def weighted_cost(p):
        return sum(e.weight * l * float(np.sum(_edge_residual(t_inv, p[e.i], p[e.j]) ** 2))
                   for e, l, t_inv in zip(edges, line, t_invs))

    for _ in range(cfg.max_outer_iterations):
        # (a) one damped GN step with numerical Jacobians
        n_free = len(nodes)
        big_h = np.zeros((6 * n_free, 6 * n_free))
        big_b = np.zeros(6 * n_free)
        for e, l, t_inv in zip(edges, line, t_invs):
            w = e.weight * l
            if w == 0.0:
                continue
            r0 = _edge_residual(t_inv, poses[e.i], poses[e.j])
            jac = np.zeros((6, 12))
            for which, node in enumerate((e.i, e.j)):
                base = poses[node]
                for c in range(6):
                    xi = np.zeros(6)
                    xi[c] = h
                    plus = compose(base, transform_exp(xi))
                    xi[c] = -h
                    minus = compose(base, transform_exp(xi))
                    if which == 0:
                        rp = _edge_residual(t_inv, plus, poses[e.j])
                        rm = _edge_residual(t_inv, minus, poses[e.j])
                    else:
                        rp = _edge_residual(t_inv, poses[e.i], plus)
                        rm = _edge_residual(t_inv, poses[e.i], minus)
                    jac[:, which * 6 + c] = (rp - rm) / (2 * h)
            sl_i = slice(6 * index[e.i], 6 * index[e.i] + 6)
            sl_j = slice(6 * index[e.j], 6 * index[e.j] + 6)
            ji = jac[:, :6]
            jj = jac[:, 6:]
            big_h[sl_i, sl_i] += w * ji.T @ ji
            big_h[sl_j, sl_j] += w * jj.T @ jj
            big_h[sl_i, sl_j] += w * ji.T @ jj
            big_h[sl_j, sl_i] += w * jj.T @ ji
            big_b[sl_i] -= w * ji.T @ r0
            big_b[sl_j] -= w * jj.T @ r0

        # gauge fix: clamp the root node
        sl_root = slice(6 * index[root], 6 * index[root] + 6)
        big_h[sl_root, :] = 0.0
        big_h[:, sl_root] = 0.0
        big_h[sl_root, sl_root] = np.eye(6)
        big_b[sl_root] = 0.0

        cost_before = weighted_cost(poses)
        for _try in range(6):
            damped = big_h + lm_lambda * np.diag(np.maximum(np.diag(big_h), 1e-12))
            try:
                delta = np.linalg.solve(damped, big_b)
            except np.linalg.LinAlgError:
                lm_lambda *= 10.0
                continue
            candidate = {
                n: compose(poses[n], transform_exp(delta[6 * index[n]:6 * index[n] + 6]))
                for n in nodes
            }
            if weighted_cost(candidate) <= cost_before + 1e-12:
                poses = candidate
                lm_lambda = max(lm_lambda / 2.0, 1e-9)
                break
            lm_lambda *= 4.0

        # (b) line-process update at the current residuals
        mu = max(mu, mu_floor)
        for k, (e, t_inv) in enumerate(zip(edges, t_invs)):
            if e.constrained or e.kind == "odometry":
                line[k] = 1.0
                continue
            r = _edge_residual(t_inv, poses[e.i], poses[e.j])
            line[k] = (mu / (mu + float(r @ r))) ** 2

        # (c) prune invalid loop edges
        keep = []
        for k, e in enumerate(edges):
            if not e.constrained and e.kind != "odometry" and line[k] < cfg.prune_threshold:
                pruned.append(e)
            else:
                keep.append(k)
        if len(keep) != len(edges):
            edges = [edges[k] for k in keep]
            t_invs = [t_invs[k] for k in keep]
            line = line[keep]
            if _components(nodes, edges) and len(_components(nodes, edges)) > 1:
                cut = [(e.i, e.j) for e in pruned]
                raise ValueError(f"optimization disconnected the graph (cut: {cut[-5:]})")

        trace.append(_objective(edges, poses, line, mu, t_invs))
        if len(trace) >= 2 and abs(trace[-2] - trace[-1]) <= cfg.convergence_eps * max(trace[-2], 1e-15):
            break
        mu = max(mu / 2.0, mu_floor)

    return poses, pruned, trace


@dataclass(frozen=True)
class GraphReport:
    rmse_g: float
    recall: float
    te_successful: float
    te_all: float
    re_successful: float
    re_all: float
    rmse_p_mean: float
    delta_rmse_p: dict    # {"same_stage": sorted deltas, "cross_stage": ...}

    def rows(self):
        return [
            ("rmse_g_m", self.rmse_g),
            ("recall", self.recall),
            ("te_successful_m", self.te_successful),
            ("te_all_m", self.te_all),
            ("re_successful_deg", self.re_successful),
            ("re_all_deg", self.re_all),
            ("rmse_p_mean_m", self.rmse_p_mean),
        ]


def evaluate_graph(poses, fragments, gt_poses, pair_subset,
                   rre_max: float = DEFAULT_RRE_MAX,
                   rte_max: float = DEFAULT_RTE_MAX) -> GraphReport:
    """Global and per-edge metrics for optimized poses.

    `fragments` maps node id to an object with `.points`; `gt_poses` maps
    node id to the GT pose; `pair_subset` lists PairwiseEstimate records
    whose transforms are the *pre-optimization* estimates, used for the
    delta-RMSE distribution split by same/cross stage.
    """
    ids = sorted(poses)
    missing = [n for n in ids if n not in gt_poses or n not in fragments]
    if missing:
        raise ValueError(f"id mismatch: {missing[:5]}")
    rmse_g = global_rmse([fragments[n] for n in ids],
                         [poses[n] for n in ids],
                         [gt_poses[n] for n in ids])

    errors = []
    rmse_ps = []
    deltas = {"same_stage": [], "cross_stage": []}
    for est in pair_subset:
        if est.source not in poses or est.target not in poses:
            raise ValueError(f"id mismatch: pair {est.source}-{est.target}")
        rel_opt = compose(poses[est.target].inverse(), poses[est.source])
        rel_gt = compose(gt_poses[est.target].inverse(), gt_poses[est.source])
        errors.append(relative_errors(rel_opt, rel_gt))
        src = fragments[est.source]
        after = pairwise_rmse(src, src, rel_opt, rel_gt)
        before = pairwise_rmse(src, src, est.transform, rel_gt)
        rmse_ps.append(after)
        key = "same_stage" if est.same_stage else "cross_stage"
        deltas[key].append(after - before)

    recall = registration_recall(errors, rre_max, rte_max) if errors else float("nan")
    success = [e for e in errors if e.rre < rre_max and e.rte < rte_max]

    def mean(values):
        return float(np.mean(values)) if values else float("nan")

    return GraphReport(
        rmse_g=rmse_g,
        recall=recall,
        te_successful=mean([e.rte for e in success]),
        te_all=mean([e.rte for e in errors]),
        re_successful=mean([e.rre for e in success]),
        re_all=mean([e.rre for e in errors]),
        rmse_p_mean=mean(rmse_ps),
        delta_rmse_p={k: sorted(v) for k, v in deltas.items()},
    )


def save_graph(path, graph: PoseGraph) -> None:
    payload = {
        "nodes": [{"id": n, "init_pose": graph.poses[n].matrix().reshape(-1).tolist()}
                  for n in graph.node_ids],
        "edges": [{"i": e.i, "j": e.j, "t": e.transform.matrix().reshape(-1).tolist(),
                   "weight": e.weight, "kind": e.kind,
                   "same_stage": e.same_stage, "constrained": e.constrained}
                  for e in graph.edges],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)


def load_graph(path) -> PoseGraph:
    with open(path) as fh:
        payload = json.load(fh)
    poses = {n["id"]: RigidTransform.from_matrix(np.array(n["init_pose"]).reshape(4, 4))
             for n in payload["nodes"]}
    edges = [Edge(e["i"], e["j"],
                  RigidTransform.from_matrix(np.array(e["t"]).reshape(4, 4)),
                  e["weight"], e.get("kind", "loop"),
                  e.get("constrained", False), e.get("same_stage", True))
             for e in payload["edges"]]
    return PoseGraph(poses, edges)
