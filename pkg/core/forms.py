"""
Forms for the JSON system description read by the lq_* commands.

A config describes either the boundary matrices (K, L, K_y, L_y) or an
already reduced "quadruple" {A_d, B_d, C_d, D_d}, plus the speed profile,
an optional zero-order term M and an optional initial state z0. Matrices may
be given row-major flat or nested; complex entries are written as strings
such as "1+2j".
"""
import json
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from django import forms

from core import model
from core.exceptions import ConfigError, HyperLQError

logger = logging.getLogger(__name__)

SPEED_TYPES = ('constant', 'affine', 'samples')
STATE_TYPES = ('constant', 'samples')


@dataclass(frozen=True, eq=False)
class PreparedConfig:
    """Everything a command needs; `system` is None for pre-reduced configs."""
    profile: model.SpatialProfile
    quadruple: model.DiscreteQuadruple
    z0: model.StateFunction
    system: Optional[model.BoundarySystem] = None
    Q1: Optional[np.ndarray] = None


def _flatten(value):
    if isinstance(value, (list, tuple)):
        for item in value:
            yield from _flatten(item)
    else:
        yield value


def _scalar(entry, name):
    if isinstance(entry, bool):
        raise forms.ValidationError(f"{name}: booleans are not matrix entries")
    if isinstance(entry, (int, float)):
        return float(entry)
    if isinstance(entry, str):
        try:
            return complex(entry.replace(' ', ''))
        except ValueError:
            raise forms.ValidationError(f"{name}: cannot read entry {entry!r} as a number")
    raise forms.ValidationError(f"{name}: unsupported entry {entry!r}")


def _nested_shape(value):
    """Shape of a nested (list of rows) matrix, None for flat lists."""
    if isinstance(value, list) and value and all(isinstance(row, list) for row in value):
        return len(value), len(value[0])
    return None


def parse_matrix(value, rows, cols, name):
    """Row-major flat or nested list -> rows x cols array."""
    if value is None:
        if rows * cols == 0:
            return np.zeros((rows, cols))
        raise forms.ValidationError(f"{name} is required")
    entries = [_scalar(entry, name) for entry in _flatten(value)]
    if len(entries) != rows * cols:
        raise forms.ValidationError(f"{name} has {len(entries)} entries, expected {rows}x{cols} = {rows * cols}")
    dtype = complex if any(isinstance(entry, complex) for entry in entries) else float
    return np.array(entries, dtype=dtype).reshape(rows, cols)


class SystemConfigForm(forms.Form):
    n = forms.IntegerField(min_value=1, required=False)
    inputs = forms.IntegerField(min_value=0, required=False)
    outputs = forms.IntegerField(min_value=0, required=False)
    grid_points = forms.IntegerField(min_value=3, required=False)

    K = forms.JSONField(required=False)
    L = forms.JSONField(required=False)
    K_y = forms.JSONField(required=False)
    L_y = forms.JSONField(required=False)
    quadruple = forms.JSONField(required=False)

    lambda0 = forms.JSONField()
    M = forms.JSONField(required=False)
    z0 = forms.JSONField(required=False)

    def __init__(self, *args, **kwargs):
        self.default_grid_points = kwargs.pop('default_grid_points', model.DEFAULT_GRID_POINTS)
        super().__init__(*args, **kwargs)

    # ----- speed profile -----
    def _build_profile(self, spec, points):
        if not isinstance(spec, dict) or spec.get('type') not in SPEED_TYPES:
            raise forms.ValidationError(f"lambda0 must be an object with type in {SPEED_TYPES}")
        kind = spec['type']
        if kind == 'constant':
            return model.constant_profile(float(spec['value']), points)
        if kind == 'affine':
            return model.affine_profile(float(spec['a']), float(spec['b']), points)
        return model.sampled_profile(spec['grid'], spec['values'])

    # ----- zero-order term -----
    def _build_M(self, value, n, points):
        if value is None:
            return None
        if isinstance(value, dict):
            if value.get('type') != 'constant':
                raise forms.ValidationError("M object form must have type 'constant'")
            matrix = parse_matrix(value.get('value'), n, n, 'M')
            return np.repeat(matrix[None, :, :], points, axis=0)
        if not isinstance(value, list) or len(value) != points:
            raise forms.ValidationError(f"M must list one {n}x{n} matrix per grid point ({points})")
        return np.array([parse_matrix(entry, n, n, f'M[{k}]') for k, entry in enumerate(value)])

    # ----- initial state -----
    def _build_z0(self, value, profile, n):
        if value is None:
            return model.StateFunction.constant(profile.grid, np.ones(n))
        if not isinstance(value, dict) or value.get('type') not in STATE_TYPES:
            raise forms.ValidationError(f"z0 must be an object with type in {STATE_TYPES}")
        if value['type'] == 'constant':
            raw = value.get('value', 1.0)
            vector = parse_matrix(raw, n, 1, 'z0')[:, 0] if isinstance(raw, list) else np.full(n, _scalar(raw, 'z0'))
            return model.StateFunction.constant(profile.grid, vector)
        samples = value.get('values')
        if not isinstance(samples, list) or len(samples) != profile.points:
            raise forms.ValidationError(f"z0 samples must list one value per grid point ({profile.points})")
        return model.StateFunction(profile.grid, np.array([parse_matrix(v, n, 1, 'z0')[:, 0] for v in samples]))

    def clean(self):
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data
        points = cleaned_data.get('grid_points') or self.default_grid_points

        try:
            profile = self._build_profile(cleaned_data.get('lambda0'), points)
            quadruple_spec = cleaned_data.get('quadruple')
            if quadruple_spec is not None:
                quadruple = self._build_quadruple(quadruple_spec, cleaned_data)
                system, n = None, quadruple.n
            else:
                system = self._build_system(cleaned_data, profile)
                quadruple, n = None, system.n
            z0 = self._build_z0(cleaned_data.get('z0'), profile, n)
        except (KeyError, TypeError, ValueError) as exc:
            raise forms.ValidationError(f"malformed config: {exc}")
        except HyperLQError as exc:
            raise forms.ValidationError(str(exc), code=type(exc).__name__)

        cleaned_data.update(profile=profile, system=system, reduced=quadruple, initial_state=z0)
        return cleaned_data

    def _dimensions(self, cleaned_data):
        n, inputs, outputs = (cleaned_data.get(key) for key in ('n', 'inputs', 'outputs'))
        if n is None or inputs is None or outputs is None:
            raise forms.ValidationError("n, inputs and outputs are required for a boundary description")
        if inputs > n:
            raise forms.ValidationError(f"inputs ({inputs}) cannot exceed n ({n})")
        return n, inputs, outputs

    def _build_system(self, cleaned_data, profile):
        n, inputs, outputs = self._dimensions(cleaned_data)
        return model.BoundarySystem(
            K=parse_matrix(cleaned_data.get('K'), n, n, 'K'),
            L=parse_matrix(cleaned_data.get('L'), n, n, 'L'),
            K_y=parse_matrix(cleaned_data.get('K_y'), outputs, n, 'K_y'),
            L_y=parse_matrix(cleaned_data.get('L_y'), outputs, n, 'L_y'),
            lambda0=profile,
            inputs=inputs,
            M=self._build_M(cleaned_data.get('M'), n, profile.points),
        )

    def _build_quadruple(self, spec, cleaned_data):
        if not isinstance(spec, dict):
            raise forms.ValidationError("quadruple must be an object with A_d, B_d, C_d, D_d")
        n, inputs, outputs = (cleaned_data.get(key) for key in ('n', 'inputs', 'outputs'))
        shapes = {name: _nested_shape(spec[name]) for name in ('A_d', 'B_d', 'C_d', 'D_d')}
        if shapes['A_d']:
            n = shapes['A_d'][0]
        if shapes['B_d']:
            inputs = shapes['B_d'][1]
        if shapes['C_d']:
            outputs = shapes['C_d'][0]
        if n is None or inputs is None or outputs is None:
            raise forms.ValidationError("flat quadruple matrices need n, inputs and outputs")
        return model.DiscreteQuadruple(
            A_d=parse_matrix(spec['A_d'], n, n, 'A_d'),
            B_d=parse_matrix(spec['B_d'], n, inputs, 'B_d'),
            C_d=parse_matrix(spec['C_d'], outputs, n, 'C_d'),
            D_d=parse_matrix(spec['D_d'], outputs, inputs, 'D_d'),
        )


def _form_message(form):
    messages = []
    for field_name, errors in form.errors.as_data().items():
        for error in errors:
            for message in error.messages:
                prefix = '' if field_name == '__all__' else f"{field_name}: "
                messages.append(f"{prefix}{message}")
    return '; '.join(messages)


def load_config(path, default_grid_points=model.DEFAULT_GRID_POINTS):
    """
    Read and validate a config file, apply q_transform when M is present and
    reduce boundary descriptions to the discrete quadruple. When M is present
    z0 is returned in transformed coordinates (Q z0) and Q1 maps boundary
    traces back through Q(1)^{-1}.
    """
    try:
        with open(path, encoding='utf-8') as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")

    form = SystemConfigForm(data=data, default_grid_points=default_grid_points)
    if not form.is_valid():
        raise ConfigError(_form_message(form))

    cleaned = form.cleaned_data
    profile, z0, system = cleaned['profile'], cleaned['initial_state'], cleaned['system']
    if system is None:
        return PreparedConfig(profile=profile, quadruple=cleaned['reduced'], z0=z0)

    model.validate(system)
    Q = model.q_profile(system)
    transformed, Q1 = model.q_transform(system, Q)
    if system.has_zero_order_term:
        z0 = model.transform_state(z0, Q)
    quadruple = model.reduce(transformed)
    logger.info(f"loaded {path}: n={system.n}, inputs={system.inputs}, outputs={system.outputs}, "
                f"p(1)={profile.p1:.6g}")
    return PreparedConfig(profile=profile, quadruple=quadruple, z0=z0, system=transformed, Q1=Q1)
