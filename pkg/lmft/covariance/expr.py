import json
import jsonschema
import numpy as np
from enum import Enum
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple
from scipy.spatial.distance import cdist
from lmft.utils.errors import ValidationError


class CovKind(Enum):
    SUM = "sum"
    PROD = "prod"
    CN = "cn"
    RBF = "rbf"
    WN = "wn"
    SS = "ss"

    @property
    def is_leaf(self) -> bool:
        return self not in (CovKind.SUM, CovKind.PROD)


LEAF_PARAMS = {
    CovKind.CN: ("c",),
    CovKind.RBF: ("l",),
    CovKind.WN: ("eps",),
    CovKind.SS: ("p", "l"),
}

PARAM_LABELS = {
    (CovKind.CN, "c"): "cn",
    (CovKind.RBF, "l"): "rbf_l",
    (CovKind.WN, "eps"): "wn",
    (CovKind.SS, "p"): "ss_p",
    (CovKind.SS, "l"): "ss_l",
}

_PARAM_SCHEMA = {
    "type": "object",
    "oneOf": [
        {
            "properties": {"free": {"type": "number", "exclusiveMinimum": 0}},
            "required": ["free"],
            "additionalProperties": False,
        },
        {
            "properties": {"fixed": {"type": "number", "exclusiveMinimum": 0}},
            "required": ["fixed"],
            "additionalProperties": False,
        },
    ],
}

COV_EXPR_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$ref": "#/$defs/node",
    "$defs": {
        "param": _PARAM_SCHEMA,
        "node": {
            "type": "object",
            "minProperties": 1,
            "maxProperties": 1,
            "properties": {
                "sum": {"type": "array", "minItems": 2, "items": {"$ref": "#/$defs/node"}},
                "prod": {"type": "array", "minItems": 2, "items": {"$ref": "#/$defs/node"}},
                "cn": {"$ref": "#/$defs/param"},
                "rbf": {"$ref": "#/$defs/param"},
                "wn": {"$ref": "#/$defs/param"},
                "ss": {
                    "type": "object",
                    "properties": {
                        "p": {"$ref": "#/$defs/param"},
                        "l": {"$ref": "#/$defs/param"},
                    },
                    "required": ["p", "l"],
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
    },
}


@dataclass(frozen=True)
class Param:
    value: float
    free: bool = True

    def __post_init__(self):
        value = float(self.value)
        if not np.isfinite(value) or value <= 0:
            raise ValidationError(f"Covariance parameters must be finite and > 0, got {self.value}")
        object.__setattr__(self, "value", value)

    def to_dict(self) -> Dict[str, float]:
        return {"free" if self.free else "fixed": self.value}

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> "Param":
        if "free" in data:
            return Param(data["free"], True)
        return Param(data["fixed"], False)


@dataclass(frozen=True)
class CovExpr:
    """
    Immutable covariance expression tree.

    Leaves carry their parameters in the order given by ``LEAF_PARAMS``; ``Sum`` and ``Prod``
    nodes carry at least two children. Parameters are enumerated left to right over the
    leaves, which is the order used by every parameter vector and gradient list.
    """

    kind: CovKind
    params: Tuple[Param, ...] = ()
    children: Tuple["CovExpr", ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind.is_leaf:
            expected = len(LEAF_PARAMS[self.kind])
            if len(self.params) != expected or self.children:
                raise ValidationError(f"{self.kind.value} takes {expected} parameter(s) and no children")
        else:
            if len(self.children) < 2:
                raise ValidationError(f"{self.kind.value} needs at least 2 children")
            if self.params:
                raise ValidationError(f"{self.kind.value} takes no parameters")

    # construction helpers

    @staticmethod
    def cn(c: float, free: bool = True) -> "CovExpr":
        return CovExpr(CovKind.CN, (Param(c, free),))

    @staticmethod
    def rbf(l: float, free: bool = True) -> "CovExpr":
        return CovExpr(CovKind.RBF, (Param(l, free),))

    @staticmethod
    def wn(eps: float, free: bool = True) -> "CovExpr":
        return CovExpr(CovKind.WN, (Param(eps, free),))

    @staticmethod
    def ss(p: float, l: float, p_free: bool = True, l_free: bool = True) -> "CovExpr":
        return CovExpr(CovKind.SS, (Param(p, p_free), Param(l, l_free)))

    @staticmethod
    def sum(*children: "CovExpr") -> "CovExpr":
        return CovExpr(CovKind.SUM, children=tuple(children))

    @staticmethod
    def prod(*children: "CovExpr") -> "CovExpr":
        return CovExpr(CovKind.PROD, children=tuple(children))

    def __add__(self, other: "CovExpr") -> "CovExpr":
        return CovExpr.sum(self, other)

    def __mul__(self, other: "CovExpr") -> "CovExpr":
        return CovExpr.prod(self, other)

    # parameter bookkeeping

    def leaves(self) -> List["CovExpr"]:
        if self.kind.is_leaf:
            return [self]
        result = []
        for child in self.children:
            result.extend(child.leaves())
        return result

    def named_parameters(self) -> List[Tuple[str, Param]]:
        """All parameters with their unique names, e.g. ``cn``, ``rbf_l``, ``wn_2``."""
        seen: Dict[str, int] = {}
        result = []
        for leaf in self.leaves():
            for pname, param in zip(LEAF_PARAMS[leaf.kind], leaf.params):
                label = PARAM_LABELS[(leaf.kind, pname)]
                seen[label] = seen.get(label, 0) + 1
                name = label if seen[label] == 1 else f"{label}_{seen[label]}"
                result.append((name, param))
        return result

    def free_names(self) -> List[str]:
        return [name for name, p in self.named_parameters() if p.free]

    def free_values(self) -> np.ndarray:
        return np.array([p.value for _, p in self.named_parameters() if p.free], dtype=float)

    def parameter_values(self) -> Dict[str, float]:
        return {name: p.value for name, p in self.named_parameters()}

    @property
    def n_free(self) -> int:
        return len(self.free_names())

    def with_free_values(self, values: Sequence[float]) -> "CovExpr":
        """Copy with the Free parameters replaced, in ``free_names`` order."""
        values = list(np.asarray(values, dtype=float).ravel())
        if len(values) != self.n_free:
            raise ValidationError(f"Expected {self.n_free} free values, got {len(values)}")
        iterator = iter(values)
        return self._map_params(lambda name, p: Param(next(iterator), True) if p.free else p)

    def freeze(self, names: Optional[Iterable[str]] = None,
               values: Optional[Dict[str, float]] = None) -> "CovExpr":
        """
        Copy in which the named Free parameters become Fixed.

        ``names=None`` freezes every parameter. ``values`` optionally overrides the value a
        parameter is frozen at; by default the current value is kept.
        """
        all_names = {name for name, _ in self.named_parameters()}
        targets = set(all_names if names is None else names)
        unknown = targets - all_names
        if unknown:
            raise ValidationError(f"Unknown covariance parameters: {sorted(unknown)}")
        values = values or {}

        def _freeze(name: str, p: Param) -> Param:
            if name in targets:
                return Param(values.get(name, p.value), False)
            return p

        return self._map_params(_freeze)

    def _map_params(self, fn) -> "CovExpr":
        names = iter([name for name, _ in self.named_parameters()])

        def _walk(node: "CovExpr") -> "CovExpr":
            if node.kind.is_leaf:
                return replace(node, params=tuple(fn(next(names), p) for p in node.params))
            return replace(node, children=tuple(_walk(child) for child in node.children))

        return _walk(self)

    # serialization

    def to_dict(self) -> Dict[str, Any]:
        if not self.kind.is_leaf:
            return {self.kind.value: [child.to_dict() for child in self.children]}
        if self.kind == CovKind.SS:
            return {"ss": {"p": self.params[0].to_dict(), "l": self.params[1].to_dict()}}
        return {self.kind.value: self.params[0].to_dict()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> "CovExpr":
        try:
            jsonschema.validate(data, COV_EXPR_SCHEMA)
        except jsonschema.exceptions.ValidationError as e:
            raise ValidationError(f"Invalid covariance expression: {e.message}",
                                  {"path": list(e.absolute_path)})
        return CovExpr._from_valid(data)

    @staticmethod
    def _from_valid(data: Dict[str, Any]) -> "CovExpr":
        (key, body), = data.items()
        kind = CovKind(key)
        if not kind.is_leaf:
            return CovExpr(kind, children=tuple(CovExpr._from_valid(child) for child in body))
        if kind == CovKind.SS:
            return CovExpr(kind, (Param.from_dict(body["p"]), Param.from_dict(body["l"])))
        return CovExpr(kind, (Param.from_dict(body),))

    @staticmethod
    def from_json(text: str) -> "CovExpr":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValidationError(f"Covariance expression is not valid JSON: {e}")
        return CovExpr.from_dict(data)

    def __str__(self) -> str:
        if self.kind == CovKind.SUM:
            return " + ".join(str(c) for c in self.children)
        if self.kind == CovKind.PROD:
            return "*".join(f"({c})" if c.kind == CovKind.SUM else str(c) for c in self.children)
        args = ", ".join(f"{p.value:g}{'' if p.free else '!'}" for p in self.params)
        return f"{self.kind.value.upper()}({args})"


def as_points(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        return X.reshape(1, 1)
    if X.ndim == 1:
        return X.reshape(-1, 1)
    return X


def _leaf_matrix(node: CovExpr, D: np.ndarray, same: np.ndarray) -> np.ndarray:
    match node.kind:
        case CovKind.CN:
            return np.full(D.shape, node.params[0].value)
        case CovKind.RBF:
            l = node.params[0].value
            return np.exp(-(D ** 2) / (2.0 * l ** 2))
        case CovKind.WN:
            return node.params[0].value * same.astype(float)
        case CovKind.SS:
            p, l = node.params[0].value, node.params[1].value
            return np.exp(-2.0 * np.sin(np.pi * D / p) ** 2 / l ** 2)
    raise ValidationError(f"Not a leaf: {node.kind}")


def _leaf_grads(node: CovExpr, K: np.ndarray, D: np.ndarray, same: np.ndarray) -> List[np.ndarray]:
    # derivatives with respect to log of each Free parameter
    grads = []
    match node.kind:
        case CovKind.CN:
            if node.params[0].free:
                grads.append(K.copy())
        case CovKind.RBF:
            if node.params[0].free:
                l = node.params[0].value
                grads.append(K * D ** 2 / l ** 2)
        case CovKind.WN:
            if node.params[0].free:
                grads.append(K.copy())
        case CovKind.SS:
            p, l = node.params[0].value, node.params[1].value
            if node.params[0].free:
                grads.append(K * 2.0 * np.pi * D * np.sin(2.0 * np.pi * D / p) / (p * l ** 2))
            if node.params[1].free:
                grads.append(K * 4.0 * np.sin(np.pi * D / p) ** 2 / l ** 2)
    return grads


def _evaluate(node: CovExpr, D: np.ndarray, same: np.ndarray) -> np.ndarray:
    if node.kind.is_leaf:
        return _leaf_matrix(node, D, same)
    values = [_evaluate(child, D, same) for child in node.children]
    result = values[0].copy()
    for value in values[1:]:
        if node.kind == CovKind.SUM:
            result = result + value
        else:
            result = result * value
    return result


def _evaluate_with_grads(node: CovExpr, D: np.ndarray,
                         same: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
    if node.kind.is_leaf:
        K = _leaf_matrix(node, D, same)
        return K, _leaf_grads(node, K, D, same)

    parts = [_evaluate_with_grads(child, D, same) for child in node.children]
    if node.kind == CovKind.SUM:
        K = parts[0][0].copy()
        for value, _ in parts[1:]:
            K = K + value
        return K, [g for _, grads in parts for g in grads]

    K = parts[0][0].copy()
    for value, _ in parts[1:]:
        K = K * value
    grads = []
    for i, (_, child_grads) in enumerate(parts):
        others = np.ones_like(K)
        for j, (value, _) in enumerate(parts):
            if j != i:
                others = others * value
        grads.extend(g * others for g in child_grads)
    return K, grads


def cov_eval(expr: CovExpr, x, x_p, same: Optional[bool] = None) -> float:
    """
    Covariance of two single points.

    White noise keys on observation identity, so ``same`` says whether both arguments are
    the same observation. It defaults to exact equality of the coordinates.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    x_p = np.atleast_1d(np.asarray(x_p, dtype=float)).ravel()
    if same is None:
        same = bool(np.array_equal(x, x_p))
    D = np.array([[float(np.linalg.norm(x - x_p))]])
    return float(_evaluate(expr, D, np.array([[same]]))[0, 0])


def cov_matrix(expr: CovExpr, X) -> np.ndarray:
    X = as_points(X)
    if len(X) == 0:
        raise ValidationError("cov_matrix needs at least one point")
    D = cdist(X, X)
    K = _evaluate(expr, D, np.eye(len(X), dtype=bool))
    return 0.5 * (K + K.T)


def cross_cov(expr: CovExpr, X, X_star) -> np.ndarray:
    """Covariance between training points (rows) and new points (columns); white noise is 0."""
    X = as_points(X)
    X_star = as_points(X_star)
    D = cdist(X, X_star)
    return _evaluate(expr, D, np.zeros(D.shape, dtype=bool))


def cov_grad(expr: CovExpr, X) -> List[np.ndarray]:
    """dK/dlog(theta_j) for every Free parameter, in ``expr.free_names()`` order."""
    if expr.n_free == 0:
        raise ValidationError("Covariance expression has no Free parameters")
    return cov_matrix_and_grad(expr, X)[1]


def cov_matrix_and_grad(expr: CovExpr, X) -> Tuple[np.ndarray, List[np.ndarray]]:
    X = as_points(X)
    D = cdist(X, X)
    K, grads = _evaluate_with_grads(expr, D, np.eye(len(X), dtype=bool))
    return 0.5 * (K + K.T), [0.5 * (g + g.T) for g in grads]


def _prior_diagonal(expr: CovExpr, include_noise: bool) -> float:
    # every supported component is stationary, so the diagonal is one value
    D = np.zeros((1, 1))
    same = np.array([[include_noise]])
    return float(_evaluate(expr, D, same)[0, 0])


def prior_diagonal(expr: CovExpr, X, include_noise: bool = True) -> np.ndarray:
    n = len(as_points(X))
    return np.full(n, _prior_diagonal(expr, include_noise))


def _diagonal_split(node: CovExpr) -> Tuple[float, float, List[float], List[float]]:
    # (signal, noise, dsignal/dlog theta, dnoise/dlog theta) of the diagonal; noise is never
    # formed as a difference
    match node.kind:
        case CovKind.CN:
            c = node.params[0].value
            return c, 0.0, [c] if node.params[0].free else [], [0.0] if node.params[0].free else []
        case CovKind.RBF | CovKind.SS:
            n_free = sum(p.free for p in node.params)
            return 1.0, 0.0, [0.0] * n_free, [0.0] * n_free
        case CovKind.WN:
            eps = node.params[0].value
            return 0.0, eps, [0.0] if node.params[0].free else [], [eps] if node.params[0].free else []

    parts = [_diagonal_split(child) for child in node.children]
    if node.kind == CovKind.SUM:
        return (sum(p[0] for p in parts), sum(p[1] for p in parts),
                [g for p in parts for g in p[2]], [g for p in parts for g in p[3]])

    S, N, dS, dN = parts[0]
    dS, dN = list(dS), list(dN)
    for S2, N2, dS2, dN2 in parts[1:]:
        T2 = S2 + N2
        dS, dN = ([a * S2 for a in dS] + [S * b for b in dS2],
                  [b * T2 + a * N2 for a, b in zip(dS, dN)]
                  + [N * (a + b) + S * b for a, b in zip(dS2, dN2)])
        S, N = S * S2, N * T2 + S * N2
    return S, N, dS, dN


def noise_diagonal(expr: CovExpr, X) -> np.ndarray:
    """Summed white-noise contribution to each diagonal entry of ``cov_matrix(expr, X)``."""
    n = len(as_points(X))
    return np.full(n, _diagonal_split(expr)[1])


def noise_diagonal_and_grad(expr: CovExpr, X) -> Tuple[np.ndarray, List[np.ndarray]]:
    n = len(as_points(X))
    _, value, _, grads = _diagonal_split(expr)
    return np.full(n, value), [np.full(n, g) for g in grads]
