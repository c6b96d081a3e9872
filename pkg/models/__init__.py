"""Модели данных"""
from .latent import (
    LatentPosition, DirichletParams,
    dot_product, attribute_probs, sample_latent, sample_latent_batch, expected_dot,
    separation_angle,
)
from .network import EdgeEvent, EventLog, ChangeWindow, VertexSubset, PartitionModel, MultiAdjacency
from .settings import (
    StepConfig, EMConfig, InitConfig, SelectionConfig, StudyConfig, ScenarioConfig, RunConfig,
)
from .results import (
    IndicatorView, SufficientStats, Candidate, StartPoint, TraceEntry, FitResult, HomogeneousFit,
    AcceptedPartition, SelectionReport, ReplicateOutcome, StudyMetrics,
)
