from pathlib import Path

TOLERANCE_CONFIG = {
    'rank': 1e-8,
    'pointwise': 1e-7,
    'frame': 1e-8,
    'bending': 1e-8,
    'exact': 1e-10,
    'integration': 1e-4,
    'variation': 1e-5,
    'triviality': 1e-7,
    'negative_control': 1e-3,
}

SAMPLING_CONFIG = {
    'points': 32,
    'seed': 0,
    'include_center': True,
    'workers': 1,
}

REGULAR_ELEMENT_CONFIG = {
    'trials': 64,
}

DECOMPOSITION_CONFIG = {
    'restarts': 20,
    'max_positive_index': 5,
}

FINITE_DIFFERENCE_CONFIG = {
    'variation_step': 1e-4,
    'frame_step': 1e-4,
    'jet_oracle_step': 1e-3,
}

GEODESIC_CONFIG = {
    'step': 1e-3,
    'sample_every': 50,
}

EXTENSION_CONFIG = {
    't_values': (-0.2, -0.1, 0.1, 0.2, 0.3),
    'x_points': 20,
}

REPORT_CONFIG = {
    'schema_version': 1,
    'indent': 2,
}

LOG_CONFIG = {
    'level': 'WARNING',
    'format': '[%(name)s] %(message)s',
}

SCHEMA_CONFIG = {
    'scene': Path(__file__).resolve().parent.parent / 'schemas' / 'scene.schema.json',
}
