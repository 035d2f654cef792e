"""Time-aware tag recommendation for folksonomies."""

__version__ = "0.1.0"

from .corpus import (  # noqa: E402
    ColumnFormat,
    DatasetError,
    Folksonomy,
    Post,
    SnapshotError,
    TagAssignment,
    TrainingIndex,
    build_index,
    load_snapshot,
    p_core,
    parse_dataset,
    preprocess,
    sample_users,
    snapshot,
)
from .evaluation import (  # noqa: E402
    AlgorithmReport,
    SplitPair,
    TestCase,
    average_precision,
    evaluate,
    leave_one_out_split,
    precision_recall_f1,
    reciprocal_rank,
)
from .ranking import softmax_normalize, top_k  # noqa: E402
from .temporal import DecayParams, bla, bll_c_recommend, bll_recommend  # noqa: E402
