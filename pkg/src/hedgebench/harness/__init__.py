from .spec import (
    BASELINE,
    DatasetSizes,
    HyperparameterGrid,
    ExperimentSpec,
    read_config_file,
    load_spec,
)
from .datasets import (
    Datasets,
    stream_offsets,
    generate_datasets,
    load_datasets,
    cached_datasets,
)
from .evaluation import (
    Evaluation,
    early_stop_check,
    early_stop_rule,
    evaluate,
    welch_t_test_one_sided,
)
from .gridsearch import grid_search
from .compare import TrialResult, ComparisonReport, compare
from .plot import position_table, emit_position_plot
