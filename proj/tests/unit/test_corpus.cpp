#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "ehrenc/corpus.hpp"
#include "ehrenc/fileio.hpp"
#include "test_support.hpp"

using namespace ehrenc;
namespace fs = std::filesystem;

TEST(Common, DecimalSyntax)
{
    for (const char* ok : {"0", "123.1", "-4", "-0.25", "5000"}) EXPECT_TRUE(is_decimal(ok)) << ok;
    for (const char* bad : {"", "abc", "1.", ".5", "1e3", "+3", "1.2.3", " 1"}) EXPECT_FALSE(is_decimal(bad)) << bad;
}

TEST(Common, RngIsReproducibleAndBounded)
{
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.between(-3, 9);
        EXPECT_EQ(x, b.between(-3, 9));
        EXPECT_GE(x, -3);
        EXPECT_LE(x, 9);
        const double u = a.unit();
        b.unit();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(Generator, SameConfigGivesIdenticalCorpus)
{
    auto cfg = default_generator_config();
    cfg.seed = 7;
    cfg.n_patients = 20;
    EXPECT_EQ(generate_corpus(cfg), generate_corpus(cfg));

    TempDir a, b;
    write_corpus(generate_corpus(cfg), a.path());
    write_corpus(generate_corpus(cfg), b.path());
    for (const auto& entry : fs::directory_iterator(a.path())) {
        EXPECT_EQ(read_file(entry.path()), read_file(b.path() / entry.path().filename())) << entry.path();
    }
}

TEST(Generator, DifferentSeedsDiffer)
{
    auto cfg = default_generator_config();
    cfg.n_patients = 10;
    auto other = cfg;
    other.seed = cfg.seed + 1;
    EXPECT_NE(generate_corpus(cfg), generate_corpus(other));
}

TEST(Generator, ZeroPatientsGivesEmptyCorpus)
{
    auto cfg = default_generator_config();
    cfg.n_patients = 0;
    EXPECT_TRUE(generate_corpus(cfg).patients.empty());
}

TEST(Generator, NumericCellsStayInDeclaredRange)
{
    GeneratorConfig cfg = default_generator_config();
    cfg.tables = {{"lab", {{"value", ColumnType::Numeric, 3.0, 7.0, 2, {}}}}};
    cfg.n_patients = 50;
    const auto corpus = generate_corpus(cfg);
    std::size_t scanned = 0;
    for (const auto& p : corpus.patients) {
        for (const auto& e : p.events) {
            for (const auto& [name, cell] : e.columns) {
                const double v = std::stod(std::get<NumericCell>(cell).text);
                EXPECT_GE(v, 3.0);
                EXPECT_LE(v, 7.0);
                ++scanned;
            }
        }
    }
    EXPECT_GT(scanned, 0u);
}

TEST(Generator, CohortRulesHold)
{
    auto cfg = default_generator_config();
    cfg.n_patients = 40;
    const auto corpus = generate_corpus(cfg);
    const auto window = static_cast<std::int64_t>(cfg.observation_window_hours * 3600);
    for (const auto& p : corpus.patients) {
        EXPECT_GE(static_cast<std::int64_t>(p.events.size()), cfg.min_events);
        for (std::size_t i = 0; i < p.events.size(); ++i) {
            EXPECT_LT(p.events[i].timestamp, window);
            if (i > 0) EXPECT_LE(p.events[i - 1].timestamp, p.events[i].timestamp);
        }
        for (const auto& l : cfg.labels) EXPECT_TRUE(p.labels.contains(l.task));
    }
    EXPECT_NO_THROW(validate_corpus(corpus));
}

TEST(Generator, RejectsBadConfig)
{
    auto cfg = default_generator_config();
    cfg.n_patients = -1;
    EXPECT_THROW(generate_corpus(cfg), Error);
    cfg = default_generator_config();
    cfg.tables[0].columns[0].choices.push_back("99999");
    EXPECT_THROW(generate_corpus(cfg), Error);
}

TEST(Loader, TwoTableFixtureHasHandCountedEvents)
{
    const auto corpus = load_corpus(fixture("two_table"));
    ASSERT_EQ(corpus.patients.size(), 2u);
    EXPECT_EQ(corpus.patients[0].id, "P1");
    EXPECT_EQ(corpus.patients[0].events.size(), 4u);
    // P2's lab row at 50000 s lies outside the 12 h window.
    EXPECT_EQ(corpus.patients[1].events.size(), 4u);
    EXPECT_EQ(corpus.event_count(), 8u);
    EXPECT_EQ(corpus.patients[1].labels.at("mortality"), 1);

    const auto& first = corpus.patients[0].events[0];
    EXPECT_EQ(first.table, "lab");
    EXPECT_EQ(first.timestamp, 0);
    ASSERT_EQ(first.columns.size(), 3u);
    EXPECT_EQ(std::get<ItemizedCell>(first.columns[0].second).code, "51385");
    EXPECT_EQ(std::get<NumericCell>(first.columns[1].second).text, "3.1");

    // An empty cell is omitted rather than stored.
    const auto& p2_first = corpus.patients[1].events[0];
    EXPECT_EQ(p2_first.columns.size(), 2u);
}

TEST(Loader, MinEventsOverrideDropsShortPatients)
{
    LoadOptions opts;
    opts.min_events = 5;
    EXPECT_TRUE(load_corpus(fixture("two_table"), opts).patients.empty());
}

TEST(Loader, NonDecimalNumericCellNamesRowAndColumn)
{
    try {
        load_corpus(fixture("bad_numeric"));
        FAIL() << "expected a load error";
    } catch (const Error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
        EXPECT_NE(msg.find("value"), std::string::npos) << msg;
        EXPECT_NE(msg.find("abc"), std::string::npos) << msg;
    }
}

TEST(Loader, EmptyTableFilesGiveZeroPatients)
{
    TempDir dir;
    copy_fixture("two_table", dir.path());
    write_file_atomic(dir.path() / "lab.tsv", "");
    write_file_atomic(dir.path() / "prescription.tsv", "");
    EXPECT_TRUE(load_corpus(dir.path()).patients.empty());
}

TEST(Loader, MissingFileAndUnpairedRowAreErrors)
{
    EXPECT_THROW(load_corpus(fixture("does_not_exist")), Error);
    TempDir dir;
    copy_fixture("two_table", dir.path());
    write_file_atomic(dir.path() / "prescription.tsv", "patient_id\ttimestamp_seconds\tdrug\tdose\nP1\t5\theparin\n");
    EXPECT_THROW(load_corpus(dir.path()), Error);
}

TEST(Loader, WriteThenLoadRoundtrips)
{
    auto cfg = default_generator_config();
    cfg.n_patients = 15;
    const auto corpus = generate_corpus(cfg);
    TempDir dir;
    write_corpus(corpus, dir.path());
    EXPECT_EQ(load_corpus(dir.path()), corpus);
}

namespace {

Corpus labelled_corpus(std::size_t n, std::size_t positives)
{
    Corpus c;
    for (std::size_t i = 0; i < n; ++i) {
        PatientRecord p;
        p.id = "P" + std::to_string(1000 + i);
        p.events.push_back({"lab", {{"value", NumericCell{"1"}}}, 0});
        p.labels["y"] = i < positives ? 1 : 0;
        c.patients.push_back(p);
    }
    return c;
}

std::set<std::string> ids(const Corpus& c)
{
    std::set<std::string> s;
    for (const auto& p : c.patients) s.insert(p.id);
    return s;
}

}  // namespace

TEST(Split, TenPatientsEightOneOne)
{
    const auto split = split_cohort(labelled_corpus(10, 3), {0.8, 0.1, 0.1}, 1);
    EXPECT_EQ(split.train.patients.size(), 8u);
    EXPECT_EQ(split.valid.patients.size(), 1u);
    EXPECT_EQ(split.test.patients.size(), 1u);
}

TEST(Split, AllTrain)
{
    const auto split = split_cohort(labelled_corpus(7, 3), {1.0, 0.0, 0.0}, 1);
    EXPECT_EQ(split.train.patients.size(), 7u);
    EXPECT_TRUE(split.valid.patients.empty());
    EXPECT_TRUE(split.test.patients.empty());
}

TEST(Split, StratifiedKeepsLabelBalance)
{
    const auto corpus = labelled_corpus(100, 50);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto split = split_cohort(corpus, {0.8, 0.1, 0.1}, seed, "y");
        for (const Corpus* part : {&split.train, &split.valid, &split.test}) {
            std::size_t pos = 0;
            for (const auto& p : part->patients) pos += p.labels.at("y");
            const double half = part->patients.size() / 2.0;
            EXPECT_LE(std::abs(static_cast<double>(pos) - half), 1.0);
        }
    }
}

TEST(Split, IsAnExactPartition)
{
    const auto corpus = labelled_corpus(37, 11);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto split = split_cohort(corpus, {0.6, 0.25, 0.15}, seed, "y");
        auto a = ids(split.train), b = ids(split.valid), c = ids(split.test);
        EXPECT_EQ(a.size() + b.size() + c.size(), corpus.patients.size());
        std::set<std::string> all = a;
        all.insert(b.begin(), b.end());
        all.insert(c.begin(), c.end());
        EXPECT_EQ(all, ids(corpus));
    }
}

TEST(Split, RejectsBadRatiosAndMissingLabels)
{
    const auto corpus = labelled_corpus(10, 3);
    EXPECT_THROW(split_cohort(corpus, {0.5, 0.1, 0.1}, 0), Error);
    EXPECT_THROW(split_cohort(corpus, {1.2, -0.1, -0.1}, 0), Error);
    EXPECT_THROW(split_cohort(corpus, {0.8, 0.1, 0.1}, 0, "missing"), Error);
}
