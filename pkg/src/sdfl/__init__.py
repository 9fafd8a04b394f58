"""Deterministic simulator for blockchain-coupled, cluster-based
semi-decentralized federated learning."""

from .aggregate import (
    AsyncPolicy,
    EmptyUpdateSet,
    SyncMode,
    Update,
    Weighting,
    apply_staleness,
    fedavg,
    filter_penalized,
    merge_intercluster,
)
from .clustering import (
    ClusterAssignment,
    TooManyClusters,
    UnknownCluster,
    WorkerProfile,
    form_clusters,
    select_head,
)
from .config import ConfigError, load_config, parse_config
from .engine import (
    DataParams,
    Engine,
    Event,
    EventKind,
    FailureSpec,
    InvalidWindow,
    InvariantViolation,
    MetricsReport,
    NetworkModel,
    QueueEmpty,
    ScenarioConfig,
    run_scenario,
)
from .learner import (
    Dataset,
    InvalidShape,
    ModelWeights,
    OptimizerConfig,
    ShapeMismatch,
    corrupt,
    evaluate,
    generate_data,
    init_model,
    loss_and_gradient,
    train_local,
)
from .ledger import (
    ContractParams,
    LedgerError,
    SettlementReport,
    TrustContract,
    init_contract,
)
from .store import BlobStore, EmptyBlob, NotFound, content_address

__version__ = "0.1.0"
