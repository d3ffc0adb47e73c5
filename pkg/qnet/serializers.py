from rest_framework import serializers

from .conf import qnet_setting
from .datasets import FORMATS, KINDS
from .losses import GRAD_MODES, LOSS_NORMS, TARGET_MODES
from .mesh import INIT_SCHEMES, ORDERS
from .metrics import POSTPROCESS_MODES
from .trainer import INIT_RECONSTRUCTION, SCHEDULES, SETTING_NAMES, UPDATES, TrainConfig
from .validators import validate_side


def setting_default(name):
    return lambda: qnet_setting(name)


class TrainConfigSerializer(serializers.Serializer):
    """Validates a flat training configuration; unset keys fall back to settings.QNET."""
    eta = serializers.FloatField(min_value=0.0, default=setting_default('ETA'))
    iterations = serializers.IntegerField(min_value=0, default=setting_default('ITERATIONS'))
    delta = serializers.FloatField(min_value=0.0, default=setting_default('DELTA'))
    l_C = serializers.IntegerField(min_value=1, default=setting_default('COMPRESSION_LAYERS'))
    l_R = serializers.IntegerField(min_value=1, default=setting_default('RECONSTRUCTION_LAYERS'))
    d = serializers.IntegerField(min_value=1, default=setting_default('COMPRESSED_DIM'))
    grad_mode = serializers.ChoiceField(GRAD_MODES, default=setting_default('GRAD_MODE'))
    loss_norm = serializers.ChoiceField(LOSS_NORMS, default=setting_default('LOSS_NORM'))
    schedule = serializers.ChoiceField(SCHEDULES, default=setting_default('SCHEDULE'))
    update = serializers.ChoiceField(UPDATES, default=setting_default('UPDATE'))
    target_mode = serializers.ChoiceField(TARGET_MODES, default=setting_default('TARGET_MODE'))
    seed = serializers.IntegerField(min_value=0, default=setting_default('SEED'))
    init_scheme = serializers.ChoiceField(INIT_SCHEMES, default=setting_default('INIT_SCHEME'))
    init_theta = serializers.FloatField(default=setting_default('INIT_THETA'))
    init_r = serializers.ChoiceField(INIT_RECONSTRUCTION, default=setting_default('INIT_RECONSTRUCTION'))
    order_c = serializers.ChoiceField(ORDERS, default=setting_default('COMPRESSION_ORDER'))
    order_r = serializers.ChoiceField(ORDERS, default=setting_default('RECONSTRUCTION_ORDER'))
    retained = serializers.ListField(child=serializers.IntegerField(min_value=0), allow_null=True,
                                     allow_empty=False, default=None)
    convergence_tol = serializers.FloatField(min_value=0.0, allow_null=True,
                                             default=setting_default('CONVERGENCE_TOL'))
    postprocess = serializers.ChoiceField(POSTPROCESS_MODES, default=setting_default('POSTPROCESS'))
    tol = serializers.FloatField(min_value=0.0, default=setting_default('PIXEL_TOLERANCE'))
    record_elapsed = serializers.BooleanField(default=setting_default('RECORD_ELAPSED'))
    log_every = serializers.IntegerField(min_value=0, default=setting_default('LOG_EVERY'))

    # keys written into run echoes that are informational only
    echo_keys = frozenset()

    def validate_eta(self, value):
        if value <= 0:
            raise serializers.ValidationError('eta must be positive')
        return value

    def validate_delta(self, value):
        if value <= 0:
            raise serializers.ValidationError('delta must be positive')
        return value

    def validate(self, attrs):
        unknown = sorted(set(self.initial_data) - set(self.fields) - self.echo_keys)
        if unknown:
            raise serializers.ValidationError({key: 'Unknown setting' for key in unknown})
        retained = attrs.get('retained')
        if retained is not None:
            if len(set(retained)) != len(retained):
                raise serializers.ValidationError({'retained': 'Indices must be distinct'})
            if len(retained) != attrs['d']:
                raise serializers.ValidationError({'retained': f'Expected {attrs["d"]} indices to match d'})
        if attrs['init_r'] == 'inverse' and (attrs['l_R'] != attrs['l_C'] or attrs['order_r'] == attrs['order_c']):
            raise serializers.ValidationError({'init_r': 'inverse needs l_R == l_C and opposite gate orders'})
        return attrs

    def to_config(self) -> TrainConfig:
        data = {name: self.validated_data[name] for name in SETTING_NAMES}
        retained = self.validated_data.get('retained')
        return TrainConfig(retained=tuple(retained) if retained else None, **data)


class ExperimentConfigSerializer(TrainConfigSerializer):
    """Training keys plus where the data comes from and where artifacts go."""
    data = serializers.CharField(required=False, allow_null=True, default=None)
    out = serializers.CharField()
    m = serializers.IntegerField(min_value=1, default=setting_default('DATASET_SIZE'))
    side = serializers.IntegerField(min_value=1, validators=[validate_side],
                                    default=setting_default('DATASET_SIDE'))
    kind = serializers.ChoiceField(KINDS, default=setting_default('DATASET_KIND'))
    data_seed = serializers.IntegerField(min_value=0, default=setting_default('DATASET_SEED'))
    targets = serializers.CharField(required=False, allow_null=True, default=None)
    baseline = serializers.BooleanField(default=True)
    sparsity = serializers.IntegerField(min_value=1, default=setting_default('BASELINE_SPARSITY'))
    baseline_iterations = serializers.IntegerField(min_value=0, default=setting_default('BASELINE_ITERATIONS'))
    trace_theta = serializers.BooleanField(default=False)

    echo_keys = frozenset({'dataset'})


class CheckpointSerializer(serializers.Serializer):
    version = serializers.IntegerField(min_value=1)
    N = serializers.IntegerField(min_value=2)
    d = serializers.IntegerField(min_value=1)
    retained = serializers.ListField(child=serializers.IntegerField(min_value=0), allow_empty=False)
    l_C = serializers.IntegerField(min_value=1)
    l_R = serializers.IntegerField(min_value=1)
    order_c = serializers.ChoiceField(ORDERS)
    order_r = serializers.ChoiceField(ORDERS)
    theta_C = serializers.ListField(child=serializers.FloatField())
    theta_R = serializers.ListField(child=serializers.FloatField())
    seed = serializers.IntegerField(allow_null=True, required=False)
    config = serializers.DictField(required=False, default=dict)

    def validate(self, attrs):
        N = attrs['N']
        if len(attrs['theta_C']) != attrs['l_C'] * (N - 1):
            raise serializers.ValidationError({'theta_C': f'Expected {attrs["l_C"] * (N - 1)} angles'})
        if len(attrs['theta_R']) != attrs['l_R'] * (N - 1):
            raise serializers.ValidationError({'theta_R': f'Expected {attrs["l_R"] * (N - 1)} angles'})
        retained = attrs['retained']
        if len(retained) != attrs['d'] or len(set(retained)) != len(retained) or max(retained) >= N:
            raise serializers.ValidationError({'retained': f'Expected {attrs["d"]} distinct indices below {N}'})
        return attrs


class DatasetManifestSerializer(serializers.Serializer):
    side = serializers.IntegerField(min_value=1, validators=[validate_side])
    M = serializers.IntegerField(min_value=1)
    kind = serializers.ChoiceField(KINDS)
    seed = serializers.IntegerField(allow_null=True, required=False, default=None)
    format = serializers.ChoiceField(FORMATS, default='csv')
    sum_sq = serializers.ListField(child=serializers.FloatField(min_value=0.0))
    provenance = serializers.DictField(required=False, default=dict)

    def validate(self, attrs):
        if len(attrs['sum_sq']) != attrs['M']:
            raise serializers.ValidationError({'sum_sq': f'Expected {attrs["M"]} values'})
        if any(v <= 0.0 for v in attrs['sum_sq']):
            raise serializers.ValidationError({'sum_sq': 'Squared sums must be positive'})
        return attrs
