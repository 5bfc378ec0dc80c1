"""Catalog scenes: closed-form immersions with bendings and the facts expected of them.

Every builder assembles a scene document and validates it through the scene-file
reader, so exported catalog files and in-memory scenes are the same objects.
"""
import json
import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from config.settings import REPORT_CONFIG, TOLERANCE_CONFIG
from src.bending.triviality import killing_residual, make_trivial_bending
from src.errors import PreconditionError
from src.extension.cone import cone_lift
from src.geometry.nullity import nullity_at
from src.geometry.submanifold import frame_at
from src.jets.parser import parse_components
from src.jets.taylor import eval_vector_jet
from src.models.scene import Scene
from src.report.runner import sample_points
from src.report.scene_file import scene_from_document

logger = logging.getLogger(__name__)

CYLINDER_X1 = [0.1, 1.3]
UNIT_BOX = [-1.0, 1.0]

# arclength-preserving variation of the unit circle: normal part cos 2x1, tangential part -sin(2x1)/2
CIRCLE_VARIATION = (
    "(+ (* 0.5 (sin (* 2 x1)) (sin x1)) (* (cos (* 2 x1)) (cos x1)))",
    "(- (* (cos (* 2 x1)) (sin x1)) (* 0.5 (sin (* 2 x1)) (cos x1)))",
)

CYLINDER_ROTATION = [
    [0.0, -1.0, -1.0, 0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
]
CYLINDER_OFFSET = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0]

SPHERE_ROTATION = [
    [0.0, -1.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.0, 0.0, 0.0],
]

SPHERICAL_BASE = (0.8, 0.6)
SPHERICAL_MOTION = [
    [0.0, 0.0, 0.0, -1.0],
    [0.0, 0.0, -0.5, 0.0],
    [0.0, 0.5, 0.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
]
HYPERBOLIC_RADIUS = 0.5
HYPERBOLIC_BOOST = [
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
]


def _zeros(count: int) -> List[str]:
    return ["0"] * count


def _unit(index: int, dim: int) -> List[str]:
    vector = _zeros(dim)
    vector[index] = "1"
    return vector


def _document(name: str, n: int, ambient_dim: int, box, f: Sequence[str], tau: Sequence[str],
              expected: Dict, tags: Sequence[str] = (), ambient_signature: int = 0, **blocks) -> Dict:
    """A scene document that runs exactly the checks it has expectations for."""
    document = {
        'name': name,
        'n': n,
        'ambient_dim': ambient_dim,
        'ambient_signature': ambient_signature,
        'chart_box': [list(interval) for interval in box],
        'f': list(f),
        'tau': list(tau),
    }
    document.update(blocks)
    document.update({
        'sampling': {'seed': 0},
        'checks': list(expected),
        'expected': expected,
        'tags': list(tags),
    })
    return document


def _cylinder(n: int, padded: bool):
    if n < 3:
        raise ValueError(f"Expected a cylinder of dimension n >= 3, got {n}")
    ambient_dim = n + 2 if padded else n + 1
    f = ["(cos x1)", "(sin x1)"] + [f"x{i}" for i in range(2, n + 1)]
    f += _zeros(ambient_dim - len(f))
    box = [CYLINDER_X1] + [UNIT_BOX] * (n - 1)
    tau = list(CIRCLE_VARIATION) + _zeros(ambient_dim - 2)
    return ambient_dim, box, f, tau


def scene_flat_plane(n: int = 5, p: int = 2) -> Scene:
    """Linear f with a constant bending: every tensor vanishes and the whole chart is nullity."""
    if n < 1 or p < 1:
        raise ValueError(f"Expected n >= 1 and p >= 1, got n={n}, p={p}")
    ambient_dim = n + p
    f = [f"x{i}" for i in range(1, n + 1)] + _zeros(p)
    tau = _zeros(ambient_dim - 1) + ["1"]
    expected = {
        'frames': 'pass',
        'bending': 'pass',
        'first_order_isometry': 'pass',
        'identities': 'pass',
        'b_variation': 'pass',
        'triviality': 'pass' if p == 1 else 'not-applicable',
        'flatness_theta': 'pass',
        'theta_rank': {'status': 'pass', 'value': n},
        'ruling': {'status': 'pass', 'value': n},
    }
    document = _document(f"flat_plane_{n}_{p}", n, ambient_dim, [UNIT_BOX] * n, f, tau, expected,
                         tags=['trivial'], ruling={'distribution': 'relative_nullity', 'bound': 'local'})
    return scene_from_document(document)


def scene_cylinder_bending(n: int = 5, padded: bool = False) -> Scene:
    """The circle variation carried along the rulings of a round cylinder.

    The padded variant sits in a hyperplane of R^(n+2); condition (*) then holds
    with eta the extra axis and xi = 0.
    """
    ambient_dim, box, f, tau = _cylinder(n, padded)
    expected = {
        'frames': 'pass',
        'bending': 'pass',
        'first_order_isometry': 'pass',
        'identities': 'pass',
        'b_variation': 'pass',
        'triviality': 'not-applicable' if padded else 'fail',
        'flatness_theta': 'pass',
        'moore': 'pass',
        'theta_rank': {'status': 'pass', 'value': n - 1},
        'ruling': {'status': 'pass', 'value': n - 1},
        'splitting': 'pass',
    }
    blocks = {
        'ruling': {'distribution': 'relative_nullity', 'bound': 'local'},
        'geodesic': {'x0': [float(np.mean(interval)) for interval in box], 'v': [0.0, 1.0] + [0.0] * (n - 2),
                     't_max': 0.5},
    }
    if padded:
        expected['condition_star'] = 'pass'
        expected['flatness_theta_hat'] = 'pass'
        expected['decomposition'] = 'not-applicable'
        expected['normal_pair'] = 'pass'
        blocks['star'] = {'reference': [0.0] * (ambient_dim - 1) + [1.0]}
    else:
        expected['above_vanish'] = 'pass'
    name = f"cylinder_{n}" + ("_padded" if padded else "")
    return scene_from_document(_document(name, n, ambient_dim, box, f, tau, expected,
                                         tags=['genuine-candidate'] if not padded else [], **blocks))


def scene_condition_star(n: int = 5) -> Scene:
    """Padded cylinder bent along the circle and pushed off its hyperplane by cos x1.

    Condition (*) holds with eta the extra axis and xi = cos x1 times the outward unit
    normal of the cylinder; the section lambda = eta then extends the bending.
    """
    ambient_dim, box, f, tau = _cylinder(n, padded=True)
    tau[-1] = "(cos x1)"
    eta = _unit(ambient_dim - 1, ambient_dim)
    xi = ["(* (cos x1) (- (cos x1)))", "(* (cos x1) (- (sin x1)))"] + _zeros(ambient_dim - 2)
    expected = {
        'frames': 'pass',
        'bending': 'pass',
        'identities': 'pass',
        'flatness_theta': 'pass',
        'condition_star': 'pass',
        'lbar': 'pass',
        'varphi': {'status': 'pass', 'value': n},
        'impext': 'pass',
        'extension': 'pass',
    }
    document = _document(f"condition_star_{n}", n, ambient_dim, box, f, tau, expected,
                         tags=['genuine-candidate'], star={'eta': eta, 'xi': xi},
                         **{'lambda': {'Z': _zeros(n), 'phi': "1"}})
    return scene_from_document(document)


def scene_trivial(matrix, offset, base: Optional[Scene] = None, section: Optional[Sequence[str]] = None,
                  name: Optional[str] = None) -> Scene:
    """Restriction tau = D f + w of an ambient Killing field to the base immersion."""
    base = scene_cylinder_bending() if base is None else base
    tau = make_trivial_bending(matrix, offset, base.chart)
    document = base.document
    expected = {
        'frames': 'pass',
        'bending': 'pass',
        'identities': 'pass',
        'triviality': 'pass' if base.chart.codimension == 1 else 'not-applicable',
        'flatness_theta': 'pass',
    }
    blocks = {}
    if section is not None:
        blocks['lambda'] = {'Z': list(section)}
        expected['extension'] = 'pass'
    return scene_from_document(_document(
        name or f"{base.name}_trivial", base.chart.n, base.chart.ambient_dim, document['chart_box'],
        document['f'], [c.to_sexpr() for c in tau.components], expected, tags=['trivial'],
        ambient_signature=base.chart.ambient_signature, **blocks))


def scene_sphere_patch() -> Scene:
    """Latitude-longitude patch of the unit sphere in R^3, held still."""
    f = ["(* (cos x1) (cos x2))", "(* (sin x1) (cos x2))", "(sin x2)"]
    expected = {'frames': 'pass', 'bending': 'pass', 'ruling': {'status': 'pass', 'value': 0}}
    return scene_from_document(_document("sphere", 2, 3, [[-0.5, 0.5], [-0.5, 0.5]], f, _zeros(3), expected,
                                          tags=['trivial'],
                                          ruling={'distribution': 'relative_nullity', 'bound': 'local'}))


def scene_killing_normal(z: Sequence[str], pushforward: Sequence[str], delta: Sequence[str],
                         base: Optional[Scene] = None, star: Optional[Dict] = None,
                         tol: Optional[float] = None) -> Scene:
    """tau = f_* Z + delta for a Killing field Z and a normal field delta orthogonal to N_1.

    Z is given by its chart components and f_* Z by its ambient components; both are
    checked against each other on sample points.
    """
    tol = TOLERANCE_CONFIG['bending'] if tol is None else tol
    base = scene_cylinder_bending(padded=True) if base is None else base
    chart = base.chart
    n, N = chart.n, chart.ambient_dim
    if len(pushforward) != N or len(delta) != N:
        raise ValueError(f"Expected {N} ambient components, got {len(pushforward)} and {len(delta)}")
    field = parse_components(z, n)
    pushed = parse_components(pushforward, n)
    normal = parse_components(delta, n)
    E = chart.epsilon
    for point in sample_points(chart, 8, seed=0):
        residual = killing_residual(chart, field, point)
        if residual > tol:
            raise PreconditionError(f"Z is not a Killing field: residual {residual:.3e} at {point}")
        frame = frame_at(chart, point)
        z_value = eval_vector_jet(field, point, order=0).value
        mismatch = float(np.max(np.abs(frame.tangent @ z_value - eval_vector_jet(pushed, point, order=0).value)))
        if mismatch > tol:
            raise PreconditionError(f"Pushforward does not match f_* Z: off by {mismatch:.3e} at {point}")
        d = eval_vector_jet(normal, point, order=0).value
        tangential = float(np.max(np.abs(frame.tangent.T @ (E * d))))
        first_normal = nullity_at(frame).first_normal
        leak = float(np.max(np.abs(first_normal.T @ (E * d)), initial=0.0))
        if max(tangential, leak) > tol:
            raise PreconditionError(f"delta is not a normal field orthogonal to N_1 at {point}")

    tau = [f"(+ {a} {b})" for a, b in zip(pushforward, delta)]
    expected = {
        'frames': 'pass',
        'bending': 'pass',
        'identities': 'pass',
        'flatness_theta': 'pass',
    }
    blocks = {}
    if star is not None:
        blocks['star'] = dict(star)
        expected['condition_star'] = 'pass'
    document = base.document
    return scene_from_document(_document(
        f"{base.name}_killing_normal", n, N, document['chart_box'], document['f'], tau, expected,
        ambient_signature=chart.ambient_signature, **blocks))


def _cone_base(sign: float):
    if sign > 0:
        a, b = SPHERICAL_BASE
        f = [f"(* {a} (cos x1) (cos x2))", f"(* {a} (sin x1) (cos x2))", f"(* {a} (sin x2))", repr(b)]
        return {'n': 2, 'ambient_dim': 4, 'ambient_signature': 0,
                'chart_box': [[-0.5, 0.5], [-0.5, 0.5]], 'f': f}, SPHERICAL_MOTION
    a = HYPERBOLIC_RADIUS
    f = [f"(* {a} (cos x1) (cos x2))", f"(* {a} (sin x1) (cos x2))", f"(* {a} (sin x2))",
         repr(float(np.sqrt(1.0 + a * a)))]
    return {'n': 2, 'ambient_dim': 4, 'ambient_signature': 1,
            'chart_box': [[-0.5, 0.5], [-0.5, 0.5]], 'f': f}, HYPERBOLIC_BOOST


def scene_cone(sign: float = 1.0) -> Scene:
    """Cone s * g over a small sphere in S^3 (sign 1) or in the hyperboloid of R^{3,1} (sign -1).

    The base bending is an ambient motion preserving the quadric, lifted as s * tau.
    """
    if sign not in (1.0, -1.0):
        raise ValueError(f"Expected sign 1 or -1, got {sign}")
    base_document, motion = _cone_base(sign)
    base = scene_from_document(dict(base_document, name="cone_base", tau=_zeros(4), checks=[]))
    base_tau = make_trivial_bending(motion, np.zeros(4), base.chart)
    lift = cone_lift(base.chart, base_tau, sign)
    cone_block = dict(base_document, sign=sign, tau=[c.to_sexpr() for c in base_tau.components])
    expected = {'frames': 'pass', 'bending': 'pass', 'cone': 'pass'}
    blocks = {'cone': cone_block}
    tags = ['cone']
    if sign > 0:
        expected['splitting'] = 'pass'
        blocks['geodesic'] = {'x0': [0.0, 0.0, 1.0], 'v': [0.0, 0.0, 1.0], 't_max': 1.0}
    else:
        tags.append('lorentzian')
    name = "cone_spherical" if sign > 0 else "cone_hyperbolic"
    return scene_from_document(_document(
        name, lift.chart.n, lift.chart.ambient_dim, lift.chart.chart_box,
        [c.to_sexpr() for c in lift.chart.components], [c.to_sexpr() for c in lift.tau.components],
        expected, tags=tags, ambient_signature=lift.chart.ambient_signature, **blocks))


def scene_negative_control(amplitude: float = 1e-2, n: int = 5) -> Scene:
    """Cylinder bending plus a perturbation that stretches the rulings; amplitude 0 is the cylinder itself."""
    if amplitude < 0.0:
        raise ValueError(f"Expected a non-negative amplitude, got {amplitude}")
    if amplitude == 0.0:
        return scene_cylinder_bending(n)
    ambient_dim, box, f, tau = _cylinder(n, padded=False)
    a = repr(float(amplitude))
    tau[0] = f"(+ {tau[0]} (* {a} (* x2 x2) (cos x1)))"
    tau[1] = f"(+ {tau[1]} (* {a} (* x2 x2) (sin x1)))"
    tau[2] = f"(* {a} x2)"
    above = {'status': 'fail', 'residual_above': TOLERANCE_CONFIG['negative_control']}
    expected = {'frames': 'pass', 'bending': dict(above), 'flatness_theta': dict(above)}
    return scene_from_document(_document(f"cylinder_{n}_corrupted", n, ambient_dim, box, f, tau, expected,
                                         tags=['negative-control']))


def _cylinder_rotation() -> Scene:
    return scene_trivial(CYLINDER_ROTATION, CYLINDER_OFFSET, section=_unit(0, 5), name="cylinder_rotation")


def _sphere_rotation() -> Scene:
    return scene_trivial(SPHERE_ROTATION, np.zeros(3), base=scene_sphere_patch(), name="sphere_rotation")


def _killing_normal() -> Scene:
    eta = _unit(6, 7)
    xi = ["(* (cos x1) (- (cos x1)))", "(* (cos x1) (- (sin x1)))"] + _zeros(5)
    return scene_killing_normal(z=_unit(1, 5), pushforward=_unit(2, 7), delta=_zeros(6) + ["(cos x1)"],
                                star={'eta': eta, 'xi': xi})


CATALOG: Dict[str, Callable[[], Scene]] = {
    'flat_plane': scene_flat_plane,
    'cylinder': scene_cylinder_bending,
    'cylinder_padded': lambda: scene_cylinder_bending(padded=True),
    'condition_star': scene_condition_star,
    'cylinder_rotation': _cylinder_rotation,
    'sphere_rotation': _sphere_rotation,
    'killing_normal': _killing_normal,
    'cone_spherical': scene_cone,
    'cone_hyperbolic': lambda: scene_cone(-1.0),
    'negative_control': scene_negative_control,
}


def catalog_scenes() -> List[Scene]:
    return [build() for build in CATALOG.values()]


def export_catalog(out_dir) -> List[Path]:
    """Write every catalog scene as <key>.json under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for key, build in CATALOG.items():
        path = out / f"{key}.json"
        path.write_text(json.dumps(build().document, indent=REPORT_CONFIG['indent']) + "\n")
        logger.info("wrote %s", path)
        written.append(path)
    return written
