"""
Documents - The JSON interchange format for complexes and rays.

Exponents, coefficients, valuations and hbar are exact fraction strings.
A document looks like

    {
      "version": "novarch/1",
      "precision": "10",
      "hbar": "1",
      "grading_modulus": 0,
      "generators": [{"name": "x", "degree": 0, "action": "0", "relative": "0", "outside": false}],
      "differential": [{"from": "x", "to": "y", "terms": [["1", "1"]]}],
      "ray": {"stages": [...], "maps": [[...]]},
      "model": {"family": "cp1", ...}
    }

`ray` and `model` are optional; a document with a ray describes a OneRay
and its top-level generators are ignored by ray consumers.
"""

import json
from typing import Any, Dict, List, Optional, Type, TypeVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from novarch.algebra.matrix import Generator, NovMatrix, ValuedBasis
from novarch.algebra.novikov import NovikovElement
from novarch.complexes.floer import FloerTypeComplex, validate_floer_type
from novarch.complexes.telescope import OneRay
from novarch.config import get_settings, to_fraction
from novarch.errors import InvariantError, ParseError, SchemaError
from novarch.utils.logger import get_logger

logger = get_logger(__name__)

VERSION = "novarch/1"

M = TypeVar("M", bound=BaseModel)


def _fraction_text(value: Any) -> str:
    if isinstance(value, float):
        raise ValueError("use a fraction string, not a float")
    try:
        return str(to_fraction(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not an exact rational: {value!r}") from exc


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class GeneratorDoc(_Strict):
    name: str = Field(min_length=1)
    degree: int
    action: str = Field(default="0", description="Norm valuation g; |e| = e^-g")
    relative: str = Field(default="0", description="Relative valuation val_M")
    outside: bool = False

    @field_validator("action", "relative", mode="before")
    @classmethod
    def _fractions(cls, value: Any) -> str:
        return _fraction_text(value)


class TripletDoc(_Strict):
    source: str = Field(alias="from")
    target: str = Field(alias="to")
    terms: List[List[str]] = Field(description="[[exponent, coefficient], ...]")

    @field_validator("terms", mode="before")
    @classmethod
    def _terms(cls, value: Any) -> List[List[str]]:
        if not isinstance(value, list):
            raise ValueError("terms must be a list of [exponent, coefficient] pairs")
        out = []
        for pair in value:
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ValueError("each term is an [exponent, coefficient] pair")
            out.append([_fraction_text(pair[0]), _fraction_text(pair[1])])
        return out


class StageDoc(_Strict):
    hbar: Optional[str] = None
    grading_modulus: int = 0
    generators: List[GeneratorDoc] = Field(default_factory=list)
    differential: List[TripletDoc] = Field(default_factory=list)

    @field_validator("hbar", mode="before")
    @classmethod
    def _hbar(cls, value: Any) -> Optional[str]:
        return None if value is None else _fraction_text(value)


class RayDoc(_Strict):
    stages: List[StageDoc] = Field(default_factory=list)
    maps: List[List[TripletDoc]] = Field(default_factory=list)


class ComplexDocument(_Strict):
    version: str = VERSION
    precision: str = "10"
    hbar: str = "1"
    grading_modulus: int = 0
    generators: List[GeneratorDoc] = Field(default_factory=list)
    differential: List[TripletDoc] = Field(default_factory=list)
    ray: Optional[RayDoc] = None
    model: Optional[Dict[str, Any]] = None

    @field_validator("precision", "hbar", mode="before")
    @classmethod
    def _fractions(cls, value: Any) -> str:
        return _fraction_text(value)

    def to_complex(self) -> FloerTypeComplex:
        return _build_complex(self.generators, self.differential, self.hbar, self.grading_modulus, "")

    def to_ray(self) -> OneRay:
        if self.ray is None:
            raise InvariantError("document has no ray section", witness="/ray")
        stages = [
            _build_complex(s.generators, s.differential, s.hbar or self.hbar, s.grading_modulus, f"/ray/stages/{n}")
            for n, s in enumerate(self.ray.stages)
        ]
        if len(self.ray.maps) != max(len(stages) - 1, 0):
            raise InvariantError("a ray needs one map between consecutive stages", witness="/ray/maps")
        maps = [
            _build_matrix(stages[n + 1].basis, stages[n].basis, triplets, f"/ray/maps/{n}")
            for n, triplets in enumerate(self.ray.maps)
        ]
        return OneRay(tuple(stages), tuple(maps))


def _check_names(generators: List[GeneratorDoc], pointer: str) -> None:
    seen = set()
    for n, g in enumerate(generators):
        if g.name in seen:
            raise SchemaError(f"duplicate generator name {g.name!r}", pointer=f"{pointer}/generators/{n}/name")
        seen.add(g.name)


def _build_matrix(rows: ValuedBasis, cols: ValuedBasis, triplets: List[TripletDoc], pointer: str) -> NovMatrix:
    entries: Dict = {}
    for n, t in enumerate(triplets):
        if t.source not in cols:
            raise InvariantError(f"unknown generator {t.source!r}", witness=f"{pointer}/{n}/from")
        if t.target not in rows:
            raise InvariantError(f"unknown generator {t.target!r}", witness=f"{pointer}/{n}/to")
        key = (rows.index(t.target), cols.index(t.source))
        x = NovikovElement.from_pairs(t.terms)
        entries[key] = entries[key] + x if key in entries else x
    return NovMatrix(rows, cols, entries)


def _build_complex(generators: List[GeneratorDoc], triplets: List[TripletDoc], hbar: str,
                   modulus: int, pointer: str) -> FloerTypeComplex:
    _check_names(generators, pointer)
    try:
        basis = ValuedBasis(
            tuple(Generator(g.name, g.degree, g.action, g.relative, g.outside) for g in generators),
            grading_modulus=modulus,
        )
    except ValueError as exc:
        raise SchemaError(str(exc), pointer=f"{pointer}/grading_modulus") from exc
    d = _build_matrix(basis, basis, triplets, f"{pointer}/differential")
    return FloerTypeComplex.from_differential(basis, d, hbar)


def _pointer(loc) -> str:
    return "/" + "/".join(str(part) for part in loc) if loc else ""


def _drop(data: Any, loc) -> None:
    for part in loc[:-1]:
        data = data[part]
    if isinstance(data, dict):
        data.pop(loc[-1], None)


def load_json(text) -> Any:
    """
    Decode UTF-8 JSON text into a JSON object.

    Raises:
        ParseError: not UTF-8, not JSON, or not an object
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("document is not UTF-8", witness=exc.start) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", witness=f"line {exc.lineno}, column {exc.colno}") from exc
    if not isinstance(data, dict):
        raise ParseError("document must be a JSON object")
    return data


def validate_model(model: Type[M], data: Dict[str, Any], strict: Optional[bool] = None) -> M:
    """
    Validate decoded JSON against a document model.

    In lax mode unknown fields are dropped with a warning; every other
    violation raises.

    Raises:
        SchemaError: first schema violation, located by a JSON pointer
    """
    strict = get_settings().strict_schema if strict is None else strict
    while True:
        try:
            return model.model_validate(data)
        except ValidationError as exc:
            errors = exc.errors()
            extras = [e for e in errors if e["type"] == "extra_forbidden"]
            if strict or len(extras) != len(errors):
                first = errors[0]
                raise SchemaError(first["msg"], pointer=_pointer(first["loc"])) from exc
            for e in extras:
                logger.warning("ignoring unknown field %s", _pointer(e["loc"]))
                _drop(data, e["loc"])


def parse_complex(text: str, strict: Optional[bool] = None) -> ComplexDocument:
    """
    Parse and validate a complex document.

    Args:
        text: UTF-8 JSON text (bytes are decoded)
        strict: Reject unknown fields (settings.strict_schema by default)

    Raises:
        ParseError: not UTF-8 JSON, or not a JSON object
        SchemaError: first schema violation, located by a JSON pointer
        InvariantError: the data do not form a valid Floer-type complex
    """
    doc = validate_model(ComplexDocument, load_json(text), strict)
    if doc.version != VERSION:
        raise SchemaError(f"unsupported version {doc.version!r}", pointer="/version")
    _check_names(doc.generators, "")
    if doc.ray is None or doc.generators:
        c = doc.to_complex()
        report = validate_floer_type(c, doc.precision)
        if not report.valid:
            v = report.first_violation
            raise InvariantError(f"not a Floer-type complex: {v.detail}", witness=f"{v.condition} at {v.witness}")
    if doc.ray is not None:
        doc.to_ray()
    return doc


def document_from_complex(c: FloerTypeComplex, precision=None, model: Optional[Dict[str, Any]] = None,
                          ray: Optional[OneRay] = None) -> ComplexDocument:
    """Document for a complex (and optionally a ray and model metadata)."""
    E = to_fraction(precision) if precision is not None else get_settings().precision
    ray_doc = None
    if ray is not None:
        ray_doc = RayDoc(
            stages=[_stage(s) for s in ray.stages],
            maps=[[TripletDoc.model_validate(t) for t in m.to_triplets()] for m in ray.maps],
        )
    return ComplexDocument(
        precision=str(E),
        hbar=str(c.hbar),
        grading_modulus=c.basis.grading_modulus,
        generators=[_generator(g) for g in c.basis],
        differential=[TripletDoc.model_validate(t) for t in c.differential.to_triplets()],
        ray=ray_doc,
        model=model,
    )


def _generator(g: Generator) -> GeneratorDoc:
    return GeneratorDoc(name=g.name, degree=g.degree, action=str(g.valuation),
                        relative=str(g.relative_valuation), outside=g.outside)


def _stage(c: FloerTypeComplex) -> StageDoc:
    return StageDoc(
        hbar=str(c.hbar),
        grading_modulus=c.basis.grading_modulus,
        generators=[_generator(g) for g in c.basis],
        differential=[TripletDoc.model_validate(t) for t in c.differential.to_triplets()],
    )


def emit(doc: ComplexDocument) -> str:
    """Canonical JSON text; emit(parse_complex(emit(doc))) == emit(doc)."""
    return json.dumps(doc.model_dump(by_alias=True, exclude_none=True), indent=2) + "\n"


# -- inputs of the tau and rigidity subcommands --------------------------------

class StarDoc(_Strict):
    points: List[List[str]] = Field(default_factory=list)
    rays: List[List[str]] = Field(default_factory=list)
    full_lines: List[List[str]] = Field(default_factory=list)

    @field_validator("points", "rays", "full_lines", mode="before")
    @classmethod
    def _vectors(cls, value: Any) -> List[List[str]]:
        return [[_fraction_text(x) for x in v] for v in value]


class TauInput(_Strict):
    """Relative lattice (m, w0, boundary), flux polytope and classes or a star shape."""
    m: int = Field(ge=1)
    w0: List[str]
    boundary: List[List[int]] = Field(default_factory=list)
    polytope_vertices: List[List[str]] = Field(default_factory=list)
    classes: List[List[int]] = Field(default_factory=list)
    star: Optional[StarDoc] = None
    at: List[List[str]] = Field(default_factory=list, description="Points where tau is evaluated")

    @field_validator("w0", mode="before")
    @classmethod
    def _w0(cls, value: Any) -> List[str]:
        return [_fraction_text(x) for x in value]

    @field_validator("polytope_vertices", "at", mode="before")
    @classmethod
    def _points(cls, value: Any) -> List[List[str]]:
        return [[_fraction_text(x) for x in v] for v in value]


class TwistDoc(_Strict):
    exponent: str
    terms: Dict[str, str] = Field(default_factory=dict, description="u as {monomial: coefficient}")
    seed: Optional[int] = Field(default=None, description="Draw a unit-norm u when no terms are given")

    @field_validator("exponent", mode="before")
    @classmethod
    def _exponent(cls, value: Any) -> str:
        return _fraction_text(value)

    @field_validator("terms", mode="before")
    @classmethod
    def _terms(cls, value: Any) -> Dict[str, str]:
        return {str(k): _fraction_text(v) for k, v in value.items()}


class RigidityInput(_Strict):
    """Affinoid model and a twisted perturbation a*b = ab(1 + T^exponent u)."""
    kind: str = Field(pattern="^(tate|annulus|polyannulus|laurent)$")
    n: int = Field(default=1, ge=1)
    radii: List[List[str]] = Field(default_factory=list)
    r: Optional[str] = None
    degree: int = Field(default=4, ge=0)
    precision: Optional[str] = None
    twist: TwistDoc

    @field_validator("radii", mode="before")
    @classmethod
    def _radii(cls, value: Any) -> List[List[str]]:
        return [[_fraction_text(x) for x in v] for v in value]

    @field_validator("r", "precision", mode="before")
    @classmethod
    def _fractions(cls, value: Any) -> Optional[str]:
        return None if value is None else _fraction_text(value)
