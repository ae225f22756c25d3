"""Model description files: YAML grammar, loading, saving.

A model file is a YAML mapping with a `kind` key:

    kind: block_jacobi            # or: wire, scattering
    name: qwz                     # optional
    dimension: 2                  # even spatial dimension d
    fiber_dim: 2                  # L
    period_perp: 1                # perpendicular period p
    hoppings:                     # list over layers 1..p
      - layer: 1
        harmonics:                # finite Fourier series in k on T^{d-1}
          - exponent: [0]         # integer vector, length d-1
            real_part: [[...]]    # L x L, row-major
            imag_part: [[...]]    # optional, defaults to zero
    onsite:                       # same shape as hoppings
      - ...
    perturbation:                 # optional
      lambda: 0.1
      hoppings: [...]             # same shape, added as lambda * (...)
      onsite: [...]

    kind: wire
    fiber_dim: L
    hopping:    {real_part: [[...]], imag_part: [[...]]}
    onsite:     {real_part: [[...]], imag_part: [[...]]}

    kind: scattering
    wire: <nested wire mapping or file path>
    insulator: <nested block_jacobi mapping or file path>

Unknown keys are rejected.  All matrices are lists of rows of reals.
"""

import os

import numpy as np
import yaml

from .errors import ModelParseError
from .model import BlockJacobiModel, Harmonic, ScatteringSystem, WireModel

_TOP_KEYS = {
    "block_jacobi": {"kind", "name", "dimension", "fiber_dim", "period_perp",
                     "hoppings", "onsite", "perturbation"},
    "wire": {"kind", "name", "fiber_dim", "hopping", "onsite"},
    "scattering": {"kind", "name", "wire", "insulator"},
}


def _fail(msg, where=""):
    raise ModelParseError(f"{where}: {msg}" if where else msg)


def _check_keys(mapping, allowed, where):
    if not isinstance(mapping, dict):
        _fail(f"expected a mapping, got {type(mapping).__name__}", where)
    unknown = set(mapping) - allowed
    if unknown:
        _fail(f"unknown keys {sorted(unknown)} (allowed: {sorted(allowed)})", where)


def _matrix(entry, L, where):
    _check_keys(entry, {"real_part", "imag_part"}, where)
    if "real_part" not in entry:
        _fail("missing real_part", where)
    try:
        re = np.asarray(entry["real_part"], dtype=float)
        im = np.asarray(entry.get("imag_part", np.zeros_like(re)), dtype=float)
    except (TypeError, ValueError) as exc:
        _fail(f"matrix entries must be real numbers ({exc})", where)
    if re.shape != (L, L) or im.shape != (L, L):
        _fail(f"matrix must be {L}x{L}, got {re.shape} / {im.shape}", where)
    return re + 1j * im


def _harmonics(entries, L, d_boundary, where):
    if not isinstance(entries, list) or not entries:
        _fail("harmonics must be a non-empty list", where)
    out = []
    for i, h in enumerate(entries):
        w = f"{where}.harmonics[{i}]"
        _check_keys(h, {"exponent", "real_part", "imag_part"}, w)
        exp = h.get("exponent")
        if (not isinstance(exp, list) or len(exp) != d_boundary
                or not all(isinstance(e, int) for e in exp)):
            _fail(f"exponent must be a list of {d_boundary} integers", w)
        out.append(Harmonic(tuple(exp),
                            _matrix({k: v for k, v in h.items() if k != "exponent"},
                                    L, w)))
    return out


def _layer_table(entries, L, d_boundary, p, where):
    if not isinstance(entries, list):
        _fail("expected a list of {layer, harmonics} entries", where)
    table = {}
    for i, e in enumerate(entries):
        w = f"{where}[{i}]"
        _check_keys(e, {"layer", "harmonics"}, w)
        layer = e.get("layer")
        if not isinstance(layer, int) or not 1 <= layer <= p:
            _fail(f"layer must be an integer in 1..{p}", w)
        if layer in table:
            _fail(f"duplicate layer {layer}", w)
        table[layer] = _harmonics(e.get("harmonics"), L, d_boundary, w)
    missing = set(range(1, p + 1)) - set(table)
    if missing:
        _fail(f"missing layers {sorted(missing)}", where)
    return table


def _parse_block_jacobi(doc, where="block_jacobi"):
    _check_keys(doc, _TOP_KEYS["block_jacobi"], where)
    for key in ("dimension", "fiber_dim", "period_perp", "hoppings", "onsite"):
        if key not in doc:
            _fail(f"missing required key '{key}'", where)
    d, L, p = doc["dimension"], doc["fiber_dim"], doc["period_perp"]
    for key, v in (("dimension", d), ("fiber_dim", L), ("period_perp", p)):
        if not isinstance(v, int) or v < 1:
            _fail(f"{key} must be a positive integer", where)
    hoppings = _layer_table(doc["hoppings"], L, d - 1, p, f"{where}.hoppings")
    onsite = _layer_table(doc["onsite"], L, d - 1, p, f"{where}.onsite")
    lam, p_h, p_o = 0.0, {}, {}
    if "perturbation" in doc:
        pert = doc["perturbation"]
        w = f"{where}.perturbation"
        _check_keys(pert, {"lambda", "hoppings", "onsite"}, w)
        lam = float(pert.get("lambda", 0.0))
        if "hoppings" in pert:
            p_h = _layer_table(pert["hoppings"], L, d - 1, p, f"{w}.hoppings")
        if "onsite" in pert:
            p_o = _layer_table(pert["onsite"], L, d - 1, p, f"{w}.onsite")
    model = BlockJacobiModel(L=L, d=d, period_perp=p, hoppings=hoppings,
                             onsite=onsite, lam=lam, pert_hoppings=p_h,
                             pert_onsite=p_o, name=str(doc.get("name", "")))
    model.validate()
    return model


def _parse_wire(doc, where="wire"):
    _check_keys(doc, _TOP_KEYS["wire"], where)
    for key in ("fiber_dim", "hopping", "onsite"):
        if key not in doc:
            _fail(f"missing required key '{key}'", where)
    L = doc["fiber_dim"]
    if not isinstance(L, int) or L < 1:
        _fail("fiber_dim must be a positive integer", where)
    A = _matrix(doc["hopping"], L, f"{where}.hopping")
    B = _matrix(doc["onsite"], L, f"{where}.onsite")
    return WireModel(A, B, name=str(doc.get("name", "")))


def _parse_scattering(doc, base_dir, where="scattering"):
    _check_keys(doc, _TOP_KEYS["scattering"], where)
    for key in ("wire", "insulator"):
        if key not in doc:
            _fail(f"missing required key '{key}'", where)

    def sub(node, expect, w):
        if isinstance(node, str):
            part = load_model(os.path.join(base_dir, node))
        else:
            part = _parse_any(node, base_dir, where=w)
        if not isinstance(part, expect):
            _fail(f"expected a {expect.__name__}", w)
        return part

    wire = sub(doc["wire"], WireModel, f"{where}.wire")
    ins = sub(doc["insulator"], BlockJacobiModel, f"{where}.insulator")
    return ScatteringSystem(wire, ins)


def _parse_any(doc, base_dir, where="model"):
    if not isinstance(doc, dict):
        _fail("model file must contain a YAML mapping", where)
    kind = doc.get("kind")
    if kind == "block_jacobi":
        return _parse_block_jacobi(doc, where)
    if kind == "wire":
        return _parse_wire(doc, where)
    if kind == "scattering":
        return _parse_scattering(doc, base_dir, where)
    _fail(f"unknown kind {kind!r} (expected block_jacobi, wire or scattering)",
          where)


def load_model(path):
    """Parse a model file into a BlockJacobiModel, WireModel or ScatteringSystem."""
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ModelParseError(f"{path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ModelParseError(f"{path}: invalid YAML: {exc}") from exc
    return _parse_any(doc, os.path.dirname(os.path.abspath(path)),
                      where=os.path.basename(path))


def _matrix_doc(M):
    doc = {"real_part": [[float(x) for x in row] for row in np.real(M)]}
    if np.any(np.imag(M)):
        doc["imag_part"] = [[float(x) for x in row] for row in np.imag(M)]
    return doc


def _layer_doc(table):
    out = []
    for layer in sorted(table):
        harm = []
        for h in table[layer]:
            entry = {"exponent": [int(e) for e in h.exponent]}
            entry.update(_matrix_doc(h.matrix))
            harm.append(entry)
        out.append({"layer": layer, "harmonics": harm})
    return out


def model_to_doc(model):
    """Serializable mapping for a model, inverse of the parser."""
    if isinstance(model, BlockJacobiModel):
        doc = {
            "kind": "block_jacobi",
            "dimension": model.d,
            "fiber_dim": model.L,
            "period_perp": model.period_perp,
            "hoppings": _layer_doc(model.hoppings),
            "onsite": _layer_doc(model.onsite),
        }
        if model.lam or model.pert_hoppings or model.pert_onsite:
            pert = {"lambda": float(model.lam)}
            if model.pert_hoppings:
                pert["hoppings"] = _layer_doc(model.pert_hoppings)
            if model.pert_onsite:
                pert["onsite"] = _layer_doc(model.pert_onsite)
            doc["perturbation"] = pert
    elif isinstance(model, WireModel):
        doc = {
            "kind": "wire",
            "fiber_dim": model.L,
            "hopping": _matrix_doc(model.A),
            "onsite": _matrix_doc(model.B),
        }
    elif isinstance(model, ScatteringSystem):
        doc = {
            "kind": "scattering",
            "wire": model_to_doc(model.wire),
            "insulator": model_to_doc(model.insulator),
        }
        doc["wire"].pop("name", None)
        doc["insulator"].pop("name", None)
        return doc
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    if getattr(model, "name", ""):
        doc["name"] = model.name
    return doc


def save_model(model, path):
    """Write a model file that load_model parses back to an equal model."""
    with open(path, "w") as fh:
        yaml.safe_dump(model_to_doc(model), fh, sort_keys=False)
    return path
