import random

import pytest

from assocdb import (
    ALL,
    CombinerConflictError,
    ConfigError,
    DbServer,
    KeyList,
    KeyPositional,
    KeyPrefix,
    KeyRange,
    TableBinding,
    TableMissingError,
    TablePair,
    dbinit,
    dbsetup,
    delete,
    from_triples,
    parse_config,
    put,
    put_triple,
    query,
)
from conftest import random_string_array


@pytest.fixture
def db():
    return DbServer("test")


def write_config(tmp_path, text):
    path = tmp_path / "db.conf"
    path.write_text(text, encoding="utf-8")
    return path


class TestConfig:
    def test_parse(self, tmp_path):
        path = write_config(
            tmp_path,
            "# server settings\ninstance=mydb02\n\nbatch_chars=1000\ndata_dir=\n",
        )
        cfg = parse_config(path)
        assert cfg == {"instance": "mydb02", "batch_chars": 1000, "data_dir": ""}

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(tmp_path / "absent.conf")

    def test_unknown_key(self, tmp_path):
        path = write_config(tmp_path, "wibble=1\n")
        with pytest.raises(ConfigError):
            parse_config(path)

    def test_not_key_value(self, tmp_path):
        path = write_config(tmp_path, "just some text\n")
        with pytest.raises(ConfigError):
            parse_config(path)

    def test_bad_batch_chars(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(write_config(tmp_path, "batch_chars=lots\n"))
        with pytest.raises(ConfigError):
            parse_config(write_config(tmp_path, "batch_chars=0\n"))

    def test_dbsetup(self, tmp_path):
        path = write_config(tmp_path, "instance=confname\nbatch_chars=1000\n")
        db = dbsetup("mydb02", path)
        assert db.instance == "mydb02"
        assert db.batch_chars == 1000

    def test_dbsetup_instance_fallback(self, tmp_path):
        path = write_config(tmp_path, "instance=confname\n")
        assert dbsetup(None, path).instance == "confname"

    def test_dbsetup_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            dbsetup("x", tmp_path / "absent.conf")

    def test_dbinit_is_noop(self):
        assert dbinit() is None


class TestBinding:
    def test_pair_binding_creates_tables(self, db):
        pair = db["my_edges", "my_edgesT"]
        assert isinstance(pair, TablePair)
        assert db.store.has_table("my_edges")
        assert db.store.has_table("my_edgesT")

    def test_single_binding(self, db):
        binding = db["my_deg"]
        assert isinstance(binding, TableBinding)
        assert db.store.has_table("my_deg")

    def test_binding_twice_is_idempotent(self, db):
        db["t", "tT"]
        db["t", "tT"]
        assert db.store.list_tables() == ["t", "tT"]

    def test_pair_needs_distinct_names(self, db):
        with pytest.raises(ValueError):
            db.bind_pair("t", "t")

    def test_degree_table_sums(self, db):
        deg = db.bind_degree_table("deg")
        for _ in range(3):
            deg.put_triple(["v"], ["OutDeg"], ["1"])
        assert db.store.scan("deg")[0].value == "3"

    def test_degree_table_fresh_is_empty(self, db):
        deg = db.bind_degree_table("deg")
        assert deg.entry_count() == 0

    def test_degree_conflicts_with_plain_table(self, db):
        db.bind_table("t")
        with pytest.raises(CombinerConflictError):
            db.bind_degree_table("t")

    def test_bind_table_accepts_existing_degree_table(self, db):
        db.bind_degree_table("deg")
        db.bind_table("deg")  # binds without touching the combiner
        assert db.store.combiner_of("deg") == "sum"

    def test_bind_pair_with_enforced_combiner(self, db):
        db.bind_table("plainA")
        with pytest.raises(CombinerConflictError):
            db.bind_pair("plainA", "plainB", combiner="sum")

    def test_batch_chars_validated(self):
        with pytest.raises(ValueError):
            DbServer(batch_chars=0)


class TestPut:
    def test_pair_writes_both_tables(self, db):
        pair = db["edges", "edgesT"]
        stats = pair.put(from_triples(["alice"], ["bob"], ["cited"]))
        assert stats.entries == 2
        assert [tuple(e) for e in db.store.scan("edges")] == [("alice", "bob", "cited")]
        assert [tuple(e) for e in db.store.scan("edgesT")] == [("bob", "alice", "cited")]

    def test_empty_array(self, db):
        pair = db["edges", "edgesT"]
        stats = pair.put(from_triples([], [], []))
        assert stats.entries == 0
        assert stats.batches == 0

    def test_single_table_stats(self, db):
        t = db["t"]
        a = from_triples(["a", "b"], ["x", "y"], [1.0, 2.0])
        stats = t.put(a)
        assert stats.entries == a.nnz
        assert stats.batches >= 1
        assert stats.seconds > 0

    def test_numeric_serialized_as_decimal(self, db):
        t = db["t"]
        t.put(from_triples(["a"], ["x"], [3.0]))
        assert db.store.scan("t")[0].value == "3"

    def test_batch_budget_chunks(self, db):
        t = db["t"]
        rows = [f"r{i:03d}" for i in range(100)]
        a = from_triples(rows, ["c"] * 100, ["v"] * 100)
        stats = t.put(a, batch_chars=50)
        assert stats.batches > 1

    def test_oversize_triple_ships_alone(self, db):
        t = db["t"]
        a = from_triples(["averyveryverylongrowkey"], ["c"], ["v"])
        stats = t.put(a, batch_chars=4)
        assert stats.batches == 1
        assert t.entry_count() == 1

    def test_batch_invariance(self, db):
        rng = random.Random(7)
        rows = [f"r{rng.randrange(400):03d}" for _ in range(1000)]
        cols = [f"c{rng.randrange(40):02d}" for _ in range(1000)]
        values = [str(rng.random()) for _ in range(1000)]
        a = from_triples(rows, cols, values, collision="last")
        results = []
        for budget in (100, 500_000):
            server = DbServer()
            pair = server["edges", "edgesT"]
            stats = pair.put(a, batch_chars=budget)
            results.append(
                (server.store.scan("edges"), server.store.scan("edgesT"), stats.batches)
            )
        assert results[0][0] == results[1][0]
        assert results[0][1] == results[1][1]
        assert results[0][2] > results[1][2] > 0


class TestPutTriple:
    def test_three_writes(self, db):
        t = db["t"]
        stats = t.put_triple(["a", "b", "c"], ["x", "y", "z"], ["1", "2", "3"])
        assert stats.entries == 3
        assert t.entry_count() == 3

    def test_duplicates_not_premerged_plain(self, db):
        t = db["t"]
        t.put_triple(["a", "a"], ["x", "x"], ["first", "second"])
        assert db.store.scan("t")[0].value == "second"

    def test_duplicates_accumulate_on_degree_table(self, db):
        deg = db.bind_degree_table("deg")
        deg.put_triple(["v", "v", "v"], ["OutDeg"] * 3, [1, 2, 3])
        assert db.store.scan("deg")[0].value == "6"

    def test_length_mismatch(self, db):
        with pytest.raises(ValueError):
            db["t"].put_triple(["a"], ["x", "y"], ["1"])

    def test_pair_put_triple_swaps(self, db):
        pair = db["edges", "edgesT"]
        pair.put_triple(["a"], ["x"], ["1"])
        assert [tuple(e) for e in db.store.scan("edgesT")] == [("x", "a", "1")]


class TestQuery:
    def setup_pair(self, db):
        pair = db["edges", "edgesT"]
        pair.put(
            from_triples(
                ["e1", "e1", "e2", "e3"],
                ["v1", "v2", "v1", "v9"],
                ["1", "1", "1", "1"],
            )
        )
        return pair

    def test_row_query(self, db):
        pair = self.setup_pair(db)
        a = pair["e1,", :]
        assert a.row_keys == ("e1",)
        assert a.col_keys == ("v1", "v2")

    def test_column_query_via_transpose(self, db):
        pair = self.setup_pair(db)
        a = pair[:, "v1,"]
        assert a.col_keys == ("v1",)
        assert a.row_keys == ("e1", "e2")

    def test_query_results_are_string_mode(self, db):
        pair = self.setup_pair(db)
        assert pair["e1,", :].is_numeric is False

    def test_empty_table_query(self, db):
        pair = db["edges", "edgesT"]
        assert pair.query(ALL, ALL).is_empty

    def test_missing_table_errors(self, db):
        dangling = TableBinding(db, "never_created")
        with pytest.raises(TableMissingError):
            dangling.query(ALL, ALL)

    def test_row_prefix(self, db):
        pair = self.setup_pair(db)
        a = pair.query(KeyPrefix("e"), ALL)
        assert a.row_keys == ("e1", "e2", "e3")

    def test_row_range(self, db):
        pair = self.setup_pair(db)
        a = pair.query(KeyRange("e1", "e2"), ALL)
        assert a.row_keys == ("e1", "e2")

    def test_both_constrained_filters_columns(self, db):
        pair = self.setup_pair(db)
        a = pair.query(KeyList(("e1",)), KeyList(("v2",)))
        assert a.triples() == (["e1"], ["v2"], ["1"])

    def test_column_filter_on_single_table(self, db):
        t = db["t"]
        t.put(from_triples(["a", "a", "b"], ["x", "y", "x"], ["1", "2", "3"]))
        a = t.query(ALL, KeyList(("x",)))
        assert a.triples() == (["a", "b"], ["x", "x"], ["1", "3"])

    def test_positional_rejected(self, db):
        pair = self.setup_pair(db)
        with pytest.raises(ValueError):
            pair.query(KeyPositional(1, 2), ALL)
        with pytest.raises(ValueError):
            pair.query(ALL, KeyPositional(1, 2))

    def test_transpose_routing_matches_full_scan_filter(self, db):
        rng = random.Random(11)
        pair = db["edges", "edgesT"]
        a = random_string_array(rng, 300)
        pair.put(a)
        for _ in range(10):
            col = rng.choice(a.col_keys)
            routed = pair.query(ALL, KeyList((col,)))
            full = pair.query(ALL, ALL)
            brute = full.select(ALL, KeyList((col,)))
            assert routed == brute

    def test_pair_transpose_consistency(self, db):
        rng = random.Random(13)
        pair = db["edges", "edgesT"]
        a = random_string_array(rng, 200)
        pair.put(a)
        col = rng.choice(a.col_keys)
        transposed_scan = TableBinding(db, "edgesT").query(KeyList((col,)), ALL)
        assert pair.query(ALL, KeyList((col,))) == transposed_scan.transpose()


class TestRoundTrip:
    def test_put_query_identity(self, db):
        rng = random.Random(17)
        for i in range(15):
            single = db.bind_table(f"single{i}")
            pair = db.bind_pair(f"main{i}", f"mainT{i}")
            a = random_string_array(rng, rng.randrange(0, 300))
            single.put(a)
            pair.put(a)
            assert single.query(ALL, ALL) == a
            assert pair.query(ALL, ALL) == a


class TestDelete:
    def test_delete_pair_drops_both(self, db):
        pair = db["edges", "edgesT"]
        delete(pair)
        assert not db.store.has_table("edges")
        assert not db.store.has_table("edgesT")

    def test_double_delete_ok(self, db):
        pair = db["edges", "edgesT"]
        pair.delete()
        pair.delete()

    def test_delete_then_bind_gives_empty(self, db):
        pair = db["edges", "edgesT"]
        pair.put(from_triples(["a"], ["b"], ["c"]))
        pair.delete()
        pair = db["edges", "edgesT"]
        assert pair.entry_count() == 0


class TestFreeFunctions:
    def test_put_query_delete(self, db):
        t = db["t"]
        a = from_triples(["a"], ["b"], ["c"])
        stats = put(t, a)
        assert stats.entries == 1
        put_triple(t, ["d"], ["e"], ["f"])
        assert query(t, ALL, ALL).nnz == 2
        delete(t)
        assert not db.store.has_table("t")
