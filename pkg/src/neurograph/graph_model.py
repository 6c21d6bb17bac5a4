"""The attributed graph model, its edit commands, and serialization.

Nodes carry a sub-pixel position, a structural kind (endpoint, junction,
isolated), a biological class (unclassified, neuron, cluster), and free-form
string attributes. Edges are undirected, may form self-loops and parallel
edges, and carry length (pixels along the traced path), optional thickness
weight, and an optional pixel path.

Graphs serialize to GraphML and JSON with deterministic element order
(sorted by id) and sorted attribute keys, so serializing the same graph
twice yields identical bytes. Edits are immutable commands; ``apply_edit``
returns a new graph and never mutates its input, which makes edit logs
replayable and undo a matter of replaying a shorter log.
"""

from __future__ import annotations

import copy
import json
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

NODE_KINDS = ("endpoint", "junction", "isolated")
NODE_CLASSES = ("unclassified", "neuron", "cluster")
EDIT_OPS = (
    "add_node",
    "remove_node",
    "add_edge",
    "remove_edge",
    "set_node_class",
    "set_attr",
    "trace_edge",
)

GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"


@dataclass
class GraphNode:
    x: float
    y: float
    kind: str = "isolated"
    node_class: str = "unclassified"
    attrs: dict[str, str] = field(default_factory=dict)


@dataclass
class GraphEdge:
    id: int
    u: int
    v: int
    length: float
    weight: float | None = None
    path: list[tuple[float, float]] | None = None
    attrs: dict[str, str] = field(default_factory=dict)


@dataclass
class ExtractedGraph:
    nodes: dict[int, GraphNode] = field(default_factory=dict)
    edges: list[GraphEdge] = field(default_factory=list)
    meta: dict[str, str] = field(default_factory=dict)

    def validate(self) -> None:
        edge_ids = set()
        for e in self.edges:
            if e.id in edge_ids:
                raise ValueError(f"duplicate edge id {e.id}")
            edge_ids.add(e.id)
            for end in (e.u, e.v):
                if end not in self.nodes:
                    raise ValueError(f"edge {e.id} references missing node {end}")
            if e.u != e.v and not e.length > 0:
                raise ValueError(f"edge {e.id} between distinct nodes must have length > 0")
            if e.u == e.v and e.length < 0:
                raise ValueError(f"self-loop {e.id} must have length >= 0")
        for nid, n in self.nodes.items():
            if n.kind not in NODE_KINDS:
                raise ValueError(f"node {nid}: unknown kind {n.kind!r}")
            if n.node_class not in NODE_CLASSES:
                raise ValueError(f"node {nid}: unknown class {n.node_class!r}")

    def degree(self, nid: int) -> int:
        d = 0
        for e in self.edges:
            if e.u == nid:
                d += 1
            if e.v == nid:
                d += 1
        return d

    def next_node_id(self) -> int:
        return max(self.nodes, default=0) + 1

    def next_edge_id(self) -> int:
        return max((e.id for e in self.edges), default=0) + 1


@dataclass(frozen=True)
class GraphEdit:
    """One curation command; payload fields depend on ``op``."""

    op: str
    payload: dict

    def __post_init__(self):
        if self.op not in EDIT_OPS:
            raise ValueError(f"unknown edit op {self.op!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "GraphEdit":
        d = dict(d)
        op = d.pop("op", None)
        if op is None:
            raise ValueError("edit is missing 'op'")
        return cls(op, d)

    def to_dict(self) -> dict:
        return {"op": self.op, **self.payload}


def polyline_length(points) -> float:
    total = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        total += math.hypot(x1 - x0, y1 - y0)
    return total


def _need(payload: dict, key: str):
    if key not in payload:
        raise ValueError(f"edit payload is missing {key!r}")
    return payload[key]


def _node_id(g: ExtractedGraph, payload: dict, key: str) -> int:
    nid = int(_need(payload, key))
    if nid not in g.nodes:
        raise ValueError(f"unknown node id {nid}")
    return nid


def apply_edit(g: ExtractedGraph, e: GraphEdit) -> ExtractedGraph:
    """Apply one edit, returning a new graph; the input graph is untouched."""
    out = copy.deepcopy(g)
    p = e.payload
    if e.op == "add_node":
        nid = int(p.get("id", out.next_node_id()))
        if nid in out.nodes:
            raise ValueError(f"node id {nid} already exists")
        kind = p.get("kind", "isolated")
        node_class = p.get("class", "unclassified")
        if kind not in NODE_KINDS:
            raise ValueError(f"unknown kind {kind!r}")
        if node_class not in NODE_CLASSES:
            raise ValueError(f"unknown class {node_class!r}")
        attrs = {str(k): str(v) for k, v in p.get("attrs", {}).items()}
        attrs.setdefault("manual", "true")
        out.nodes[nid] = GraphNode(float(_need(p, "x")), float(_need(p, "y")), kind, node_class, attrs)
    elif e.op == "remove_node":
        nid = _node_id(out, p, "id")
        del out.nodes[nid]
        out.edges = [ed for ed in out.edges if ed.u != nid and ed.v != nid]
    elif e.op == "add_edge":
        u = _node_id(out, p, "u")
        v = _node_id(out, p, "v")
        if u == v:
            raise ValueError("ambiguous self-loop: add_edge needs distinct nodes or a traced path")
        eid = int(p.get("id", out.next_edge_id()))
        if any(ed.id == eid for ed in out.edges):
            raise ValueError(f"edge id {eid} already exists")
        nu, nv = out.nodes[u], out.nodes[v]
        length = math.hypot(nu.x - nv.x, nu.y - nv.y)
        attrs = {str(k): str(v2) for k, v2 in p.get("attrs", {}).items()}
        attrs["manual"] = "true"
        out.edges.append(GraphEdge(eid, u, v, length, None, None, attrs))
    elif e.op == "remove_edge":
        eid = int(_need(p, "id"))
        if not any(ed.id == eid for ed in out.edges):
            raise ValueError(f"unknown edge id {eid}")
        out.edges = [ed for ed in out.edges if ed.id != eid]
    elif e.op == "set_node_class":
        nid = _node_id(out, p, "id")
        cls = _need(p, "class")
        if cls not in NODE_CLASSES:
            raise ValueError(f"unknown class {cls!r}")
        out.nodes[nid].node_class = cls
    elif e.op == "set_attr":
        target = p.get("target", "node")
        key = str(_need(p, "key"))
        value = str(_need(p, "value"))
        if target == "node":
            out.nodes[_node_id(out, p, "id")].attrs[key] = value
        elif target == "edge":
            eid = int(_need(p, "id"))
            for ed in out.edges:
                if ed.id == eid:
                    ed.attrs[key] = value
                    break
            else:
                raise ValueError(f"unknown edge id {eid}")
        else:
            raise ValueError(f"unknown set_attr target {target!r}")
    elif e.op == "trace_edge":
        u = _node_id(out, p, "u")
        v = _node_id(out, p, "v")
        path = [(float(x), float(y)) for x, y in _need(p, "path")]
        if len(path) < 2:
            raise ValueError("traced path needs at least two points")
        eid = int(p.get("id", out.next_edge_id()))
        if any(ed.id == eid for ed in out.edges):
            raise ValueError(f"edge id {eid} already exists")
        attrs = {str(k): str(v2) for k, v2 in p.get("attrs", {}).items()}
        attrs["manual"] = "true"
        out.edges.append(GraphEdge(eid, u, v, polyline_length(path), None, path, attrs))
    return out


def replay(g: ExtractedGraph, edits) -> ExtractedGraph:
    for e in edits:
        g = apply_edit(g, e)
    return g


# ---------------------------------------------------------------- formats


def _path_to_str(path) -> str:
    return ";".join(f"{x!r},{y!r}" for x, y in path)


def _path_from_str(s: str):
    if not s:
        return []
    out = []
    for pair in s.split(";"):
        x, y = pair.split(",")
        out.append((float(x), float(y)))
    return out


def _node_json(nid: int, n: GraphNode) -> dict:
    return {
        "id": nid,
        "x": n.x,
        "y": n.y,
        "kind": n.kind,
        "class": n.node_class,
        "attrs": {k: n.attrs[k] for k in sorted(n.attrs)},
    }


def _edge_json(e: GraphEdge) -> dict:
    d = {
        "id": e.id,
        "u": e.u,
        "v": e.v,
        "length": e.length,
        "attrs": {k: e.attrs[k] for k in sorted(e.attrs)},
    }
    if e.weight is not None:
        d["weight"] = e.weight
    if e.path is not None:
        d["path"] = [[x, y] for x, y in e.path]
    return d


def graph_to_json_obj(g: ExtractedGraph) -> dict:
    return {
        "meta": {k: g.meta[k] for k in sorted(g.meta)},
        "nodes": [_node_json(nid, g.nodes[nid]) for nid in sorted(g.nodes)],
        "edges": [_edge_json(e) for e in sorted(g.edges, key=lambda e: e.id)],
    }


def graph_from_json_obj(obj: dict) -> ExtractedGraph:
    g = ExtractedGraph(meta={str(k): str(v) for k, v in obj.get("meta", {}).items()})
    for nd in obj.get("nodes", []):
        g.nodes[int(nd["id"])] = GraphNode(
            float(nd["x"]),
            float(nd["y"]),
            str(nd.get("kind", "isolated")),
            str(nd.get("class", "unclassified")),
            {str(k): str(v) for k, v in nd.get("attrs", {}).items()},
        )
    for ed in obj.get("edges", []):
        path = ed.get("path")
        g.edges.append(
            GraphEdge(
                int(ed["id"]),
                int(ed["u"]),
                int(ed["v"]),
                float(ed["length"]),
                float(ed["weight"]) if "weight" in ed else None,
                [(float(x), float(y)) for x, y in path] if path is not None else None,
                {str(k): str(v) for k, v in ed.get("attrs", {}).items()},
            )
        )
    g.validate()
    return g


def serialize(g: ExtractedGraph, format: str = "json") -> bytes:
    """Deterministic byte encoding of the graph in ``json`` or ``graphml``."""
    g.validate()
    if format == "json":
        return (json.dumps(graph_to_json_obj(g), indent=2, sort_keys=True) + "\n").encode()
    if format == "graphml":
        return _to_graphml(g)
    raise ValueError(f"unknown format {format!r}")


def parse(data: bytes, format: str = "json") -> ExtractedGraph:
    if format == "json":
        return graph_from_json_obj(json.loads(data.decode()))
    if format == "graphml":
        return _from_graphml(data)
    raise ValueError(f"unknown format {format!r}")


_NODE_KEYS = (("x", "double"), ("y", "double"), ("kind", "string"), ("class", "string"))
_EDGE_KEYS = (("length", "double"), ("weight", "double"), ("manual", "boolean"), ("path", "string"))


def _to_graphml(g: ExtractedGraph) -> bytes:
    root = ET.Element("graphml", {"xmlns": GRAPHML_NS})
    key_ids: dict[tuple[str, str], str] = {}

    def declare(domain: str, name: str, attr_type: str):
        kid = f"k{len(key_ids)}"
        key_ids[(domain, name)] = kid
        ET.SubElement(root, "key", {"id": kid, "for": domain, "attr.name": name, "attr.type": attr_type})

    for name, typ in (("source", "string"), ("version", "string"), ("created", "string")):
        declare("graph", name, typ)
    for name in sorted(set(g.meta) - {"source", "version", "created"}):
        declare("graph", name, "string")
    for name, typ in _NODE_KEYS:
        declare("node", name, typ)
    extra_node_attrs = sorted({k for n in g.nodes.values() for k in n.attrs})
    for name in extra_node_attrs:
        if ("node", name) not in key_ids:
            declare("node", name, "string")
    for name, typ in _EDGE_KEYS:
        declare("edge", name, typ)
    extra_edge_attrs = sorted({k for e in g.edges for k in e.attrs} - {"manual"})
    for name in extra_edge_attrs:
        if ("edge", name) not in key_ids:
            declare("edge", name, "string")

    graph_el = ET.SubElement(root, "graph", {"id": "G", "edgedefault": "undirected"})

    def data_el(parent, domain, name, value):
        el = ET.SubElement(parent, "data", {"key": key_ids[(domain, name)]})
        el.text = value

    for name in sorted(g.meta):
        data_el(graph_el, "graph", name, g.meta[name])
    for nid in sorted(g.nodes):
        n = g.nodes[nid]
        el = ET.SubElement(graph_el, "node", {"id": f"n{nid}"})
        data_el(el, "node", "x", repr(n.x))
        data_el(el, "node", "y", repr(n.y))
        data_el(el, "node", "kind", n.kind)
        data_el(el, "node", "class", n.node_class)
        for k in sorted(n.attrs):
            data_el(el, "node", k, n.attrs[k])
    for e in sorted(g.edges, key=lambda e: e.id):
        el = ET.SubElement(graph_el, "edge", {"id": f"e{e.id}", "source": f"n{e.u}", "target": f"n{e.v}"})
        data_el(el, "edge", "length", repr(e.length))
        if e.weight is not None:
            data_el(el, "edge", "weight", repr(e.weight))
        if "manual" in e.attrs:
            data_el(el, "edge", "manual", e.attrs["manual"])
        if e.path is not None:
            data_el(el, "edge", "path", _path_to_str(e.path))
        for k in sorted(e.attrs):
            if k != "manual":
                data_el(el, "edge", k, e.attrs[k])
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


def _from_graphml(data: bytes) -> ExtractedGraph:
    root = ET.fromstring(data.decode())
    ns = {"g": GRAPHML_NS}
    keys: dict[str, tuple[str, str]] = {}
    for key_el in root.findall("g:key", ns):
        keys[key_el.get("id")] = (key_el.get("for"), key_el.get("attr.name"))
    graph_el = root.find("g:graph", ns)
    if graph_el is None:
        raise ValueError("graphml document has no graph element")
    g = ExtractedGraph()

    def read_data(el):
        out = {}
        for d in el.findall("g:data", ns):
            _, name = keys.get(d.get("key"), (None, d.get("key")))
            out[name] = d.text or ""
        return out

    g.meta = read_data(graph_el)
    for node_el in graph_el.findall("g:node", ns):
        nid = int(node_el.get("id").lstrip("n"))
        d = read_data(node_el)
        attrs = {
            k: v
            for k, v in d.items()
            if k not in ("x", "y", "kind", "class")
        }
        g.nodes[nid] = GraphNode(
            float(d["x"]),
            float(d["y"]),
            d.get("kind", "isolated"),
            d.get("class", "unclassified"),
            attrs,
        )
    for edge_el in graph_el.findall("g:edge", ns):
        eid = int(edge_el.get("id").lstrip("e"))
        u = int(edge_el.get("source").lstrip("n"))
        v = int(edge_el.get("target").lstrip("n"))
        d = read_data(edge_el)
        attrs = {k: v for k, v in d.items() if k not in ("length", "weight", "path")}
        path = _path_from_str(d["path"]) if "path" in d else None
        g.edges.append(
            GraphEdge(
                eid,
                u,
                v,
                float(d["length"]),
                float(d["weight"]) if "weight" in d else None,
                path,
                attrs,
            )
        )
    g.validate()
    return g
