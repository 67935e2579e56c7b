"""Symmetry-algebra tags, model parameters and the case document schema."""
import json
import math
from dataclasses import asdict, dataclass

from ..errors import SchemaError

CASE_TAGS = ("A32", "A33", "A34", "A35", "A35Half", "A36", "A37")

_ALIASES = {t.lower(): t for t in CASE_TAGS}
_ALIASES.update({"a35half": "A35Half", "a35_half": "A35Half", "a35-half": "A35Half",
                 "a35-1/2": "A35Half", "example": "A35Half"})


def normalize_tag(tag):
    key = str(tag).strip().lower().replace(",", "")
    if key not in _ALIASES:
        raise SchemaError(f"unknown algebra tag {tag!r}; expected one of {', '.join(CASE_TAGS)}")
    return _ALIASES[key]


@dataclass(frozen=True)
class ModelParams:
    lam: float
    m0: float = None
    alpha0: float = None
    zeta0: float = 0.0
    z0: float = None
    F0: float = None
    G0: float = 0.0

    def as_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass(frozen=True)
class AlgebraCase:
    """Tag plus the constants of K3 = a0(p dq + y dx) + b0(q dq - y dy) + n0(q dp + x dy) + m0(p dp - x dx)."""
    tag: str
    b0: float
    n0: float
    a0: float
    m0: float


def structure_constants(tag, params=None):
    tag = normalize_tag(tag)
    if tag == "A32":
        return AlgebraCase(tag, 1.0, 0.0, 1.0, 1.0)
    if tag == "A33":
        return AlgebraCase(tag, 1.0, 0.0, 0.0, 1.0)
    if tag == "A34":
        return AlgebraCase(tag, 1.0, 0.0, 0.0, -1.0)
    if tag == "A35":
        if params is None or params.m0 is None:
            raise SchemaError("A35 needs m0")
        return AlgebraCase(tag, 1.0, 0.0, 0.0, float(params.m0))
    if tag == "A35Half":
        return AlgebraCase(tag, 1.0, 0.0, 0.0, -0.5)
    if tag == "A36":
        return AlgebraCase(tag, 0.0, -1.0, 1.0, 0.0)
    if params is None or params.alpha0 is None:
        raise SchemaError("A37 needs alpha0")
    a = float(params.alpha0)
    return AlgebraCase(tag, a, -1.0, 1.0, a)


def _finite(name, v):
    if v is None:
        return
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
        raise SchemaError(f"parameter {name} must be a finite real, got {v!r}")


def validate(tag, params):
    """Check ``params`` against the requirements of ``tag``; returns the tag."""
    tag = normalize_tag(tag)
    for name, v in params.as_dict().items():
        _finite(name, v)
    if params.lam == 0:
        raise SchemaError("lambda must be nonzero")
    if tag == "A35":
        if params.m0 is None:
            raise SchemaError("A35 needs m0")
        if not 0 < abs(params.m0) < 1:
            raise SchemaError(f"A35 needs 0 < |m0| < 1, got {params.m0}")
        if params.m0 == -0.5:
            raise SchemaError("m0 = -1/2 is the separate A35Half case")
    if tag == "A37":
        if params.alpha0 is None or not params.alpha0 > 0:
            raise SchemaError("A37 needs alpha0 > 0")
    if tag == "A33":
        if params.F0 is None or params.F0 == 0:
            raise SchemaError("A33 needs F0 != 0")
    return tag


_DOC_KEYS = {"case", "tag", "lambda", "m0", "alpha0", "zeta0", "z0", "F0", "G0", "seed", "span"}


@dataclass(frozen=True)
class CaseDocument:
    tag: str
    params: ModelParams
    seed: object = "auto"   # "auto" or a mapping of seed axes
    span: tuple = None

    def to_json(self):
        doc = {"case": self.tag, "lambda": self.params.lam}
        doc.update({k: v for k, v in self.params.as_dict().items() if k != "lam"})
        doc["seed"] = self.seed if isinstance(self.seed, str) else dict(self.seed)
        if self.span is not None:
            doc["span"] = list(self.span)
        return json.dumps(doc, sort_keys=True)


def parse_case_document(doc):
    """Build a :class:`CaseDocument` from a dict or a JSON string."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"case document is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("case document must be a JSON object")
    unknown = set(doc) - _DOC_KEYS
    if unknown:
        raise SchemaError(f"unknown keys in case document: {sorted(unknown)}")
    tag = doc.get("case", doc.get("tag"))
    if tag is None:
        raise SchemaError("case document needs a 'case' tag")
    if "lambda" not in doc:
        raise SchemaError("case document needs 'lambda'")
    kw = {k: doc[k] for k in ("m0", "alpha0", "z0", "F0") if doc.get(k) is not None}
    for k in ("zeta0", "G0"):
        if doc.get(k) is not None:
            kw[k] = doc[k]
    for k, v in list(kw.items()) + [("lambda", doc["lambda"])]:
        _finite(k, v)
    params = ModelParams(lam=float(doc["lambda"]), **{k: float(v) for k, v in kw.items()})
    tag = validate(tag, params)
    seed = doc.get("seed", "auto")
    if not (seed == "auto" or isinstance(seed, dict)):
        raise SchemaError("seed must be 'auto' or an object of seed coordinates")
    if isinstance(seed, dict):
        for k, v in seed.items():
            _finite(f"seed.{k}", v)
    span = doc.get("span")
    if span is not None:
        if not (isinstance(span, (list, tuple)) and len(span) == 2):
            raise SchemaError("span must be a pair [start, end]")
        for v in span:
            _finite("span", v)
        if span[0] == span[1]:
            raise SchemaError("span must be non-degenerate")
        span = (float(span[0]), float(span[1]))
    return CaseDocument(tag, params, seed, span)
