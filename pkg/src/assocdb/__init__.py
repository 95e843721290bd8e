"""Associative arrays over an embedded sorted key-value store.

The pieces compose bottom-up: :mod:`assocdb.arrays` provides the sparse
string-keyed array and its algebra, :mod:`assocdb.kvstore` the embedded
sorted table store, :mod:`assocdb.connector` the binding layer between
the two (table pairs, batched ingest, indexed queries), and
:mod:`assocdb.graphgen` / :mod:`assocdb.bench` the power-law graph
generator and the ingest/query benchmark harness. ``assocdb.cli`` wraps
it all for the command line.
"""

from .arrays import (
    ALL,
    AllKeys,
    AssocArray,
    KeyList,
    KeyPositional,
    KeyPrefix,
    KeyRange,
    KeySpec,
    as_keyspec,
    format_decimal,
    from_triples,
    parse_decimal,
    parse_keylist,
    read_tsv,
    read_tsv_triples,
    spec_from_string,
    write_tsv,
)
from .bench import (
    DEGREE_TABLE,
    EDGE_TABLE,
    QUERY_CLASSES,
    TRANSPOSE_TABLE,
    BenchRecord,
    IngestPlan,
    QueryPlan,
    read_csv,
    run_ingest,
    run_query,
    select_vertices,
    write_csv,
)
from .connector import (
    DEFAULT_BATCH_CHARS,
    ConfigError,
    DbServer,
    IngestStats,
    TableBinding,
    TablePair,
    dbinit,
    dbsetup,
    delete,
    parse_config,
    put,
    put_triple,
    query,
)
from .graphgen import (
    GRAPH500_PROBS,
    EdgeList,
    GenParams,
    degrees,
    edge_block,
    generate,
    to_adjacency,
    vertex_key,
    write_edges,
)
from .kvstore import (
    CombinerConflictError,
    MutationBatch,
    SnapshotFormatError,
    Store,
    StoreEntry,
    StoreError,
    TableMissingError,
)

__version__ = "0.1.0"
