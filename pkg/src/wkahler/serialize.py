"""JSON input parsing, schemas and report rendering."""

from __future__ import annotations

import dataclasses
import math
from fractions import Fraction

import jsonschema

from .fibration import BasisFactor, FibrationSpec, catalog_entry
from .geometry import Polytope, ToricClassFamily, polytope_from_halfspaces, polytope_from_vertices
from .scalar import ValidationError, to_scalar, to_vector
from .weights import (
    Add,
    Affine,
    Const,
    Constant,
    Exp,
    Expression,
    Log,
    LogAffine,
    Mul,
    Pow,
    PolyProduct,
    Weight,
)

NUMBER = {"anyOf": [{"type": "number"}, {"type": "string", "pattern": r"^\s*-?[0-9./eE+-]+\s*$"}]}
VECTOR = {"type": "array", "items": NUMBER}

POLYTOPE_SCHEMA = {
    "type": "object",
    "oneOf": [
        {"required": ["vertices"], "properties": {"vertices": {"type": "array", "items": VECTOR, "minItems": 1}}},
        {
            "required": ["normals", "offsets"],
            "properties": {"normals": {"type": "array", "items": VECTOR}, "offsets": VECTOR},
        },
    ],
}

WEIGHT_SCHEMA = {
    "type": "object",
    "required": ["type"],
    "properties": {"type": {"enum": ["constant", "log_affine", "poly_product", "expr"]}},
    "allOf": [
        {"if": {"properties": {"type": {"const": "constant"}}}, "then": {"required": ["k"], "properties": {"k": NUMBER}}},
        {
            "if": {"properties": {"type": {"const": "log_affine"}}},
            "then": {"required": ["a"], "properties": {"a": VECTOR, "b": NUMBER}},
        },
        {
            "if": {"properties": {"type": {"const": "poly_product"}}},
            "then": {
                "required": ["factors"],
                "properties": {
                    "coef": NUMBER,
                    "factors": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["p", "c"],
                            "properties": {"p": VECTOR, "c": NUMBER, "power": {"type": "integer", "minimum": 0}},
                        },
                    },
                },
            },
        },
        {"if": {"properties": {"type": {"const": "expr"}}}, "then": {"required": ["tree"]}},
    ],
}

FAMILY_SCHEMA = {
    "type": "object",
    "required": ["normals", "offsets_omega0", "offsets_c1"],
    "properties": {
        "normals": {"type": "array", "items": VECTOR, "minItems": 1},
        "offsets_omega0": VECTOR,
        "offsets_c1": VECTOR,
    },
}

FACTOR_SCHEMA = {
    "type": "object",
    "required": ["p", "c"],
    "properties": {
        "p": VECTOR,
        "c": NUMBER,
        "dim": {"type": "integer", "minimum": 1},
        "beta_basis": NUMBER,
        "delta_alg": NUMBER,
        "catalog": {"type": "string"},
        "name": {"type": "string"},
    },
}

FIBRATION_SCHEMA = {
    "type": "object",
    "required": ["fiber", "factors"],
    "properties": {
        "fiber": POLYTOPE_SCHEMA,
        "lambda": NUMBER,
        "family": FAMILY_SCHEMA,
        "v": WEIGHT_SCHEMA,
        "factors": {"type": "array", "items": FACTOR_SCHEMA, "minItems": 1},
        "basis_normalization": {"enum": ["anticanonical", "class"]},
        "fiber_toric": {"type": "boolean"},
        "fiber_beta": NUMBER,
    },
}

OUTPUT_SCHEMA = {
    "type": "object",
    "required": ["subcommand", "claims", "provenance", "result"],
    "properties": {
        "subcommand": {"type": "string"},
        "claims": {"type": "object", "additionalProperties": {"enum": ["exact", "upper_bound", "lower_bound", "numerical", "asserted"]}},
        "provenance": {"type": "string"},
        "result": {"type": "object"},
        "verify": {"type": "object"},
        "mode": {"enum": ["exact", "float"]},
    },
}


def validate(obj, schema, what: str) -> None:
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise ValidationError(f"invalid {what} at '{path}': {exc.message}") from None


# -- parsing -------------------------------------------------------------------

def parse_polytope(obj) -> Polytope:
    validate(obj, POLYTOPE_SCHEMA, "polytope")
    if "vertices" in obj:
        return polytope_from_vertices([to_vector(v) for v in obj["vertices"]])
    return polytope_from_halfspaces([to_vector(n) for n in obj["normals"]], [to_scalar(c) for c in obj["offsets"]])


_NODE_OPS = {"add", "mul", "pow", "exp", "log", "affine", "const"}


def _parse_node(t):
    if not isinstance(t, dict) or t.get("op") not in _NODE_OPS:
        raise ValidationError(f"expression nodes need an 'op' in {sorted(_NODE_OPS)}")
    op = t["op"]
    if op == "const":
        return Const(float(to_scalar(t["value"])))
    if op == "affine":
        return Affine(to_vector(t["p"]), to_scalar(t.get("c", 0)))
    if op == "add":
        return Add(tuple(_parse_node(a) for a in t["args"]))
    if op == "mul":
        return Mul(tuple(_parse_node(a) for a in t["args"]))
    if op == "pow":
        return Pow(_parse_node(t["base"]), float(to_scalar(t["exponent"])))
    if op == "exp":
        return Exp(_parse_node(t["arg"]))
    return Log(_parse_node(t["arg"]))


def parse_weight(obj, *, exact: bool = True) -> Weight:
    if obj is None:
        return Constant(Fraction(1))
    validate(obj, WEIGHT_SCHEMA, "weight")
    kind = obj["type"]
    if kind == "constant":
        return Constant(to_scalar(obj["k"]))
    if kind == "log_affine":
        return LogAffine(to_vector(obj["a"]), to_scalar(obj.get("b", 0)))
    if kind == "poly_product":
        factors = tuple(
            (to_vector(f["p"]), to_scalar(f["c"]), int(f.get("power", 1))) for f in obj["factors"]
        )
        return PolyProduct(factors, to_scalar(obj.get("coef", 1)))
    if exact:
        raise ValidationError("expression weights are only accepted in --float mode")
    try:
        return Expression(_parse_node(obj["tree"]))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed expression tree: missing {exc}") from None


def parse_family(obj) -> ToricClassFamily:
    validate(obj, FAMILY_SCHEMA, "class family")
    return ToricClassFamily.make(obj["normals"], obj["offsets_omega0"], obj["offsets_c1"])


def parse_factor(obj) -> BasisFactor:
    validate(obj, FACTOR_SCHEMA, "basis factor")
    dim = obj.get("dim")
    beta = obj.get("beta_basis")
    if "catalog" in obj:
        cdim, cbeta = catalog_entry(obj["catalog"])
        dim = cdim if dim is None else dim
        beta = cbeta if beta is None else beta
    if dim is None:
        raise ValidationError("basis factor needs 'dim' (or a 'catalog' entry)")
    return BasisFactor.make(dim, obj["c"], obj["p"], beta, obj.get("delta_alg"), obj.get("name", ""))


def parse_fibration(obj, *, exact: bool = True) -> FibrationSpec:
    validate(obj, FIBRATION_SCHEMA, "fibration")
    fiber = parse_polytope(obj["fiber"])
    family = parse_family(obj["family"]) if "family" in obj else None
    lam = None if family is not None else to_scalar(obj.get("lambda", 1))
    return FibrationSpec(
        fiber,
        tuple(parse_factor(f) for f in obj["factors"]),
        parse_weight(obj.get("v"), exact=exact),
        lam,
        family,
        obj.get("basis_normalization", "anticanonical"),
        obj.get("fiber_toric", True),
    )


# -- rendering -----------------------------------------------------------------

def jsonable(x, *, exact: bool = True):
    """Fractions become "p/q" strings (floats in float mode); dataclasses become dicts."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, Fraction):
        if exact:
            return str(x)
        return float(x)
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return {f.name: jsonable(getattr(x, f.name), exact=exact) for f in dataclasses.fields(x)}
    if isinstance(x, dict):
        return {str(k): jsonable(v, exact=exact) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v, exact=exact) for v in x]
    if hasattr(x, "item"):
        return jsonable(x.item(), exact=exact)
    return str(x)
