"""Manifest and pair file models and the objects they describe."""
from typing import Dict, List, Optional, Tuple, Type, Union

from pydantic import (
    BaseModel,
    Field,
    ValidationError,
    root_validator,
    validator,
)

from ..calculus.fields import (
    BivectorField,
    MapField,
    OneFormField,
    SectionField,
    ThreeFormField,
    TwoFormField,
    VectorField,
)
from ..common.errors import ManifestError
from ..common.typing import DictStrAny
from ..dirac.coupling import CouplingTriple
from ..dirac.frame import (
    DiracFrame,
    foliation_dirac,
    graph_bivector,
    graph_two_form,
)
from ..pair.realization import (
    RealizationPair,
    RealizationRecord,
    default_spray,
)
from ..pair.typing import PairData

MANIFEST_SCHEMA = 1
KINDS = ("two_form", "bivector", "foliation", "frame", "coupling")
MAP_KEYS = ("s", "t")


class SectionModel(BaseModel):
    """One section u + xi of a frame, both parts optional."""

    vector: Optional[List[str]] = None
    form: Optional[List[str]] = None

    @root_validator(skip_on_failure=True)
    def check_parts(  # pylint: disable=no-self-argument
        cls, values: DictStrAny
    ) -> DictStrAny:
        """A section needs at least one part."""
        if values.get("vector") is None and values.get("form") is None:
            raise ValueError("a section needs a vector or a form")
        return values


class FormModel(BaseModel):
    """Components of a form keyed by "i,j" or "i,j,k"."""

    components: Dict[str, str] = {}


class StructureModel(BaseModel):
    """Descriptor of a Dirac structure.

    two_form and bivector read components, foliation reads map, frame
    reads sections and coupling reads map, horizontal, omega and pi.
    """

    kind: str
    components: Dict[str, str] = {}
    map: List[str] = []
    sections: List[SectionModel] = []
    horizontal: List[List[str]] = []
    omega: Dict[str, str] = {}
    pi: Dict[str, str] = {}

    @validator("kind")
    def check_kind(  # pylint: disable=no-self-argument
        cls, value: str
    ) -> str:
        """Kind must be a known constructor."""
        if value not in KINDS:
            raise ValueError(f"unknown kind {value}, expected one of {KINDS}")
        return value

    @root_validator(skip_on_failure=True)
    def check_keys(  # pylint: disable=no-self-argument
        cls, values: DictStrAny
    ) -> DictStrAny:
        """Kind specific keys must be present."""
        kind = values["kind"]
        if kind in ("foliation", "coupling") and not values.get("map"):
            raise ValueError(f"{kind} needs a map")
        if kind == "frame" and not values.get("sections"):
            raise ValueError("frame needs sections")
        if kind == "coupling" and len(values.get("horizontal", [])) != len(
            values["map"]
        ):
            raise ValueError("coupling needs one horizontal field per map")
        return values


class Manifest(BaseModel):
    """A Dirac structure on a box of R^dim with optional maps and twist."""

    schema_: int = Field(MANIFEST_SCHEMA, alias="schema")
    name: str = ""
    dim: int
    box: List[Tuple[float, float]]
    structure: StructureModel
    maps: Dict[str, List[str]] = {}
    twist: Optional[FormModel] = None

    class Config:
        """Accept both the alias and the field name."""

        allow_population_by_field_name = True

    @validator("schema_")
    def check_schema(  # pylint: disable=no-self-argument
        cls, value: int
    ) -> int:
        """Only one schema version exists."""
        if value != MANIFEST_SCHEMA:
            raise ValueError(f"unsupported schema {value}")
        return value

    @root_validator(skip_on_failure=True)
    def check_box(  # pylint: disable=no-self-argument
        cls, values: DictStrAny
    ) -> DictStrAny:
        """One nonempty interval per variable and known map names."""
        if values["dim"] < 0 or len(values["box"]) != values["dim"]:
            raise ValueError("box needs one interval per variable")
        if any(lo >= hi for lo, hi in values["box"]):
            raise ValueError("box intervals must have min < max")
        unknown = set(values.get("maps", {})) - set(MAP_KEYS)
        if unknown:
            raise ValueError(f"unknown maps {sorted(unknown)}")
        return values


class ExplicitPair(BaseModel):
    """A hand written diagram (M0, L0) <- (Sigma, omega) -> (M1, L1)."""

    schema_: int = Field(MANIFEST_SCHEMA, alias="schema")
    kind: str = "explicit"
    name: str = ""
    box: List[Tuple[float, float]]
    maps: Dict[str, List[str]]
    omega: Dict[str, str] = {}
    l0: Manifest
    l1: Manifest

    class Config:
        """Accept both the alias and the field name."""

        allow_population_by_field_name = True

    @root_validator(skip_on_failure=True)
    def check_legs(  # pylint: disable=no-self-argument
        cls, values: DictStrAny
    ) -> DictStrAny:
        """Both legs are given and end on the target charts."""
        maps = values["maps"]
        if set(maps) != set(MAP_KEYS):
            raise ValueError("an explicit pair needs maps s and t")
        if len(maps["s"]) != values["l0"].dim:
            raise ValueError("s does not end on the chart of l0")
        if len(maps["t"]) != values["l1"].dim:
            raise ValueError("t does not end on the chart of l1")
        return values


def _validated(model: Type[BaseModel], content: DictStrAny) -> BaseModel:
    try:
        return model.parse_obj(content)
    except ValidationError as err:
        raise ManifestError(str(err)) from err


def parse_manifest(content: DictStrAny) -> Manifest:
    """Validate manifest content."""
    manifest = _validated(Manifest, content)
    assert isinstance(manifest, Manifest)
    return manifest


def parse_map(dim: int, text: str) -> MapField:
    """Parse a map given as "expr;expr;..."."""
    texts = [part.strip() for part in text.split(";") if part.strip()]
    return MapField.parse(dim, texts)


def build_map(manifest: Manifest, key: str) -> MapField:
    """The map s or t of the manifest."""
    if key not in manifest.maps:
        raise ManifestError(f"manifest {manifest.name} has no map {key}")
    return MapField.parse(manifest.dim, manifest.maps[key])


def build_coupling(manifest: Manifest) -> CouplingTriple:
    """Coupling triple of a coupling manifest."""
    structure = manifest.structure
    if structure.kind != "coupling":
        raise ManifestError(f"{manifest.name} is not a coupling manifest")
    dim = manifest.dim
    return CouplingTriple(
        MapField.parse(dim, structure.map),
        [VectorField.parse(texts) for texts in structure.horizontal],
        TwoFormField.from_texts(dim, structure.omega),
        BivectorField.from_texts(dim, structure.pi),
        manifest.box,
    )


def _section(dim: int, model: SectionModel) -> SectionField:
    if any(
        len(part) != dim
        for part in (model.vector, model.form)
        if part is not None
    ):
        raise ManifestError(f"section parts must have {dim} components")
    return SectionField(
        None if model.vector is None else VectorField.parse(model.vector),
        None if model.form is None else OneFormField.parse_list(model.form),
    )


def build_frame(manifest: Manifest) -> DiracFrame:
    """The Dirac frame the manifest describes."""
    structure = manifest.structure
    dim, box, name = manifest.dim, manifest.box, manifest.name
    if structure.kind == "two_form":
        form = TwoFormField.from_texts(dim, structure.components)
        return graph_two_form(form, box, name)
    if structure.kind == "bivector":
        pi = BivectorField.from_texts(dim, structure.components)
        return graph_bivector(pi, box, name)
    if structure.kind == "foliation":
        return foliation_dirac(MapField.parse(dim, structure.map), box, name)
    if structure.kind == "coupling":
        return build_coupling(manifest).frame()
    if len(structure.sections) != dim:
        raise ManifestError(f"a frame on R^{dim} needs {dim} sections")
    return DiracFrame(
        [_section(dim, section) for section in structure.sections], box, name
    )


def build_bivector(manifest: Manifest) -> Optional[BivectorField]:
    """The bivector of a bivector manifest."""
    if manifest.structure.kind != "bivector":
        return None
    return BivectorField.from_texts(
        manifest.dim, manifest.structure.components
    )


def build_twist(manifest: Manifest) -> Optional[ThreeFormField]:
    """The closed three-form twisting the bracket, if any."""
    if manifest.twist is None:
        return None
    return ThreeFormField.from_texts(manifest.dim, manifest.twist.components)


def realization_pair(record: RealizationRecord) -> RealizationPair:
    """Rebuild a realization with the default spray of its structure."""
    manifest = parse_manifest(record.structure)
    frame = build_frame(manifest)
    pair = RealizationPair(
        default_spray(frame),
        record.radius,
        record.quad_nodes,
        record.flow_steps,
        record.name,
    )
    if [list(b) for b in pair.box] != [list(b) for b in record.box]:
        raise ManifestError(f"pair {record.name} does not match its box")
    return pair


def explicit_pair(model: ExplicitPair) -> PairData:
    """PairData of a hand written diagram."""
    dim = len(model.box)
    return PairData(
        MapField.parse(dim, model.maps["s"]),
        MapField.parse(dim, model.maps["t"]),
        TwoFormField.from_texts(dim, model.omega),
        build_frame(model.l0),
        build_frame(model.l1),
        model.box,
        model.name,
    )


PairModel = Union[RealizationRecord, ExplicitPair]


def parse_pair(content: DictStrAny) -> PairModel:
    """Validate pair file content by its kind."""
    kind = content.get("kind", "realization")
    if kind == "realization":
        record = _validated(RealizationRecord, content)
        assert isinstance(record, RealizationRecord)
        return record
    if kind == "explicit":
        model = _validated(ExplicitPair, content)
        assert isinstance(model, ExplicitPair)
        return model
    raise ManifestError(f"unknown pair kind {kind}")


def load_pair(
    content: DictStrAny,
) -> Tuple[PairData, Optional[RealizationPair]]:
    """Pair data of a pair file, with the realization when there is one."""
    model = parse_pair(content)
    if isinstance(model, RealizationRecord):
        pair = realization_pair(model)
        return pair.pair_data(), pair
    return explicit_pair(model), None
