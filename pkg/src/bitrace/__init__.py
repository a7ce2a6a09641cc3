"""Issue-commit trace link recovery for bilingual software projects.

Artifacts are translated by several translators, consensual biterms are
mined from the dependency parses of all translation variants, and the
artifacts enriched with them are ranked with a TF-IDF vector space model.
"""
from .consensus import ConsensusIndex, build_consensus_index, cons_distinc_variant, select_sentence_biterms
from .corpus import Artifact, Project, load_project, project_stats
from .evaluation import average_precision, evaluate, mean_average_precision
from .parsing import Biterm, extract_candidate_biterms, stem
from .pipeline import PipelineConfig, ablation_report, run
from .retrieval import build_vectors, cosine, normalize_tokens, rank_links
from .weighting import apply_enrichment, emphasis, repetition_count

__version__ = "0.1.0"
