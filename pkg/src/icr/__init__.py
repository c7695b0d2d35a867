"""Instruction-following dialogue games: clarification-request tooling.

Scene modeling and diffing, corpus loading, utterance-type annotation,
corpus analysis with significance tests, dataset assembly for the two
clarification classification tasks, embedding stores, classifiers, and
evaluation metrics. The `icr` CLI wires everything into reproducible
commands.
"""

from .annotation import (
    Label,
    LabelSet,
    UtteranceType,
    cohen_kappa,
    collapse_types,
    disagreement_rate,
    label_session,
    project_labels,
    read_labels,
    resolve,
    write_labels,
)
from .analysis import (
    DynamicsGroups,
    assign_groups,
    descriptive_stats,
    histograms,
    initial_bigram,
    initial_bigrams,
    permutation_test,
    rank_frequency,
    round_dynamics,
    split_overlap,
    vocab_partition,
)
from .corpus import (
    Corpus,
    Dialogue,
    Round,
    RoundRecord,
    SchemaConfig,
    Speaker,
    Utterance,
    corpus_summary,
    load_corpus,
    round_table,
    validate,
    write_round_table,
)
from .datasets import (
    ContextFilter,
    Datapoint,
    Task,
    build_dataset,
    build_task1,
    build_task2,
    enumerate_inputs,
    featurize,
    featurize_all,
    load_content_words,
    mark_context,
    read_datapoints,
    split_datapoints,
    teller_vocabulary,
    write_datapoints,
)
from .evaluation import (
    EvalReport,
    average_precision,
    curves,
    evaluate,
    macro_f1,
    per_round_ap,
    random_baseline,
    results_table,
)
from .models import (
    Checkpoint,
    ClassifierConfig,
    Model,
    StoreBundle,
    TrainConfig,
    ablate,
    fit_logistic,
    forward,
    init_model,
    load_checkpoint,
    param_count,
    predict,
    save_checkpoint,
    train,
)
from .scene import (
    Action,
    ActionKind,
    Clipart,
    ComponentSimilarity,
    Scene,
    SceneGrammar,
    count_actions,
    diff_scenes,
    make_clipart,
    parse_scene,
    replay_actions,
    scene_similarity,
    scenes_equal,
    serialize_scene,
)
from .stores import EmbeddingStore, hash_embed, missing_keys, read_store, write_store

__version__ = "0.1.0"
