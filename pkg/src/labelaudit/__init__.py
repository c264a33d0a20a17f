"""labelaudit: audit label consistency of NER annotation subsets.

Train a built-in linear-chain CRF on differently ordered training
curricula and compare the learning curves: subsets annotated under the
same codebook are equivalently predictive of each other, so a depressed
curve exposes inconsistent labels and a recovered curve validates a
correction.
"""

__version__ = "0.1.0"

from .corpus import (Dataset, Sentence, Span, Token, check_bio2,
                     extract_spans, make_sentence, normalize_iob1,
                     parse_conll, render_spans, serialize_conll)
from .crf import (CrfModel, PotentialTable, TrainConfig,
                  forward_log_partition, load_model, log_likelihood_grad,
                  marginals, predict, save_model, sentence_potentials,
                  viterbi)
from .errors import (ConllParseError, DataError, LabelAuditError,
                     NumericError)
from .estimator import CrfTagger
from .evaluation import EvalResult, Scores, evaluate, evaluate_model
from .features import DEFAULT_TEMPLATES, FeatureIndex, build_features
from .protocol import (AuditReport, Curriculum, IdentifyPlan, LearningCurve,
                       ValidatePlan, build_identify_curricula,
                       build_validate_curricula, make_identify_plan,
                       make_validate_plan, run_curve, run_identify,
                       run_validate)
from .synth import CorruptionSpec, corrupt_labels, synthesize_corpus
from .training import train

__all__ = [
    "__version__",
    "AuditReport", "ConllParseError", "CorruptionSpec", "CrfModel",
    "CrfTagger", "Curriculum", "DataError", "Dataset", "DEFAULT_TEMPLATES",
    "EvalResult", "FeatureIndex", "IdentifyPlan", "LabelAuditError",
    "LearningCurve", "NumericError", "PotentialTable", "Scores", "Sentence",
    "Span", "Token", "TrainConfig", "ValidatePlan",
    "build_features", "build_identify_curricula", "build_validate_curricula",
    "check_bio2", "corrupt_labels", "evaluate", "evaluate_model",
    "extract_spans", "forward_log_partition", "load_model",
    "log_likelihood_grad", "make_identify_plan", "make_sentence",
    "make_validate_plan", "marginals", "normalize_iob1", "parse_conll",
    "predict", "render_spans", "run_curve", "run_identify", "run_validate",
    "save_model", "sentence_potentials", "serialize_conll",
    "synthesize_corpus", "train", "viterbi",
]
