#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "infodyn/error.hpp"
#include "infodyn/pipeline.hpp"
#include "support/planted_fixture.hpp"

using namespace infodyn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("infodyn_pipeline_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

nlohmann::json small_config(const fs::path& dir, std::uint64_t seed) {
    return {{"markets", fixtures::write_planted_fixture(dir / "data", seed, 600)},
            {"window", {{"width", 300}, {"step", 300}}},
            {"estimator", {{"K", 4}, {"k_range", {1, 2}}, {"te_k_range", {1, 2}}, {"delay_range", {1, 2}}}},
            {"significance", {{"n_surrogates", 19}, {"alpha", 0.05}}},
            {"seed", 5}};
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out[e.path().filename().string()] = ss.str();
    }
    return out;
}

template <class E>
std::string message_of(const PipelineConfig& cfg) {
    try {
        (void)run_pipeline(cfg);
    } catch (const E& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("config parsing") {
    const fs::path dir = scratch("config");
    const nlohmann::json good = small_config(dir, 1);
    const auto cfg = pipeline_config_from_json(good);
    CHECK(cfg.markets.size() == 3);
    CHECK(cfg.window.width == 300);
    CHECK(cfg.te_k_max == 2);
    CHECK(cfg.delay_max == 2);
    CHECK(cfg.significance.n_surrogates == 19);
    CHECK(cfg.by);
    CHECK(cfg.by_scope == ByScope::Window);
    CHECK(cfg.seed == 5);
    CHECK(config_hash(cfg).size() == 16);
    CHECK(config_hash(cfg) == config_hash(pipeline_config_from_json(good)));
    auto other = good;
    other["seed"] = 6;
    CHECK(config_hash(cfg) != config_hash(pipeline_config_from_json(other)));

    auto expect_config_error = [&](auto&& edit) {
        nlohmann::json j = good;
        edit(j);
        CHECK_THROWS_AS((void)pipeline_config_from_json(j), ConfigError);
    };
    expect_config_error([](auto& j) { j.erase("markets"); });
    expect_config_error([](auto& j) { j["markets"] = nlohmann::json::array(); });
    expect_config_error([](auto& j) { j["markets"][1]["name"] = "A"; });
    expect_config_error([](auto& j) { j["markets"][0]["series"]["returns"] = "/nonexistent/x.csv"; });
    expect_config_error([](auto& j) { j["markets"][0]["series"].erase("spread"); });
    expect_config_error([](auto& j) { j["estimator"]["delay_range"] = {3, 2}; });
    expect_config_error([](auto& j) { j["estimator"]["k_range"] = {2, 4}; });
    expect_config_error([](auto& j) { j["estimator"]["K"] = 0; });
    expect_config_error([](auto& j) { j["estimator"]["kind"] = "binning"; });
    expect_config_error([](auto& j) { j["significance"]["alpha"] = 1.5; });
    expect_config_error([](auto& j) { j["significance"]["by_scope"] = "everything"; });
    expect_config_error([](auto& j) { j["window"]["step"] = 400; });
    expect_config_error([](auto& j) { j["window"]["width"] = "wide"; });
    expect_config_error([](auto& j) { j["imbalance"] = {{"windows", "ticks"}}; });
    expect_config_error([](auto& j) { j["workers"] = -1; });
    CHECK_THROWS_AS((void)pipeline_config_from_json(nlohmann::json::array()), ConfigError);
    CHECK_THROWS_AS((void)load_pipeline_config((dir / "missing.json").string()), ConfigError);

    std::ofstream(dir / "broken.json") << "{\"markets\": [";
    CHECK_THROWS_AS((void)load_pipeline_config((dir / "broken.json").string()), ConfigError);

    CHECK(by_scope_from_string(to_string(ByScope::Global)) == ByScope::Global);
    CHECK(output_header("00ff", 9) == "infodyn 0.1.0 config_hash=00ff seed=9");
}

TEST_CASE("pipeline runs are byte-identical and independent of workers") {
    const fs::path dir = scratch("determinism");
    nlohmann::json j = small_config(dir, 2);
    j["output_dir"] = (dir / "run1").string();
    j["workers"] = 1;
    const auto first = run_pipeline(pipeline_config_from_json(j));
    j["output_dir"] = (dir / "run2").string();
    j["workers"] = 3;
    const auto second = run_pipeline(pipeline_config_from_json(j));

    REQUIRE(first.windows.size() == 2);
    CHECK(first.markets == std::vector<std::string>{"A", "B", "C"});
    CHECK(!first.windows[0].result.links.empty());
    CHECK(!first.windows[0].result.ais.empty());

    const auto a = read_dir(dir / "run1");
    const auto b = read_dir(dir / "run2");
    CHECK(a.size() >= 6);
    REQUIRE(a.count("links.csv") == 1);
    REQUIRE(a.count("summary.json") == 1);
    // the worker count is not part of the effective configuration, so even the header matches
    for (const auto& [name, content] : a) {
        REQUIRE(b.count(name) == 1);
        CHECK_MESSAGE(content == b.at(name), name);
    }
    const std::string expected_header = "# " + output_header(first.config_hash, 5);
    for (const char* name : {"links.csv", "nodes.csv", "graph_all_windows.csv"}) {
        CHECK(a.at(name).substr(0, expected_header.size()) == expected_header);
    }
    const auto summary = nlohmann::json::parse(a.at("summary.json"));
    CHECK(summary.at("meta").at("config_hash") == first.config_hash);
    CHECK(summary.at("meta").at("seed") == 5);

    // the strong planted link is significant before correction in both windows
    for (const auto& w : first.windows) {
        bool found = false;
        for (const auto& l : w.result.links) {
            if (l.src_market == "A" && l.dst_market == "B" && l.src_obs == "returns" && l.dst_obs == "returns") {
                found = l.significant && l.p_value <= 0.05;
            }
        }
        CHECK(found);
    }
}

TEST_CASE("failures name their stage") {
    const fs::path dir = scratch("stages");
    nlohmann::json j = small_config(dir, 3);
    j["window"] = {{"width", 5000}, {"step", 100}};
    const std::string too_short = message_of<DataError>(pipeline_config_from_json(j));
    CHECK(too_short.find("stage 'window'") != std::string::npos);

    j = small_config(dir, 3);
    {
        std::ofstream bad(dir / "data" / "B_spread.csv");
        bad << "timestamp_ms,value\n0,1\n60000,2\n150000,3\n";
    }
    const std::string load = message_of<DataError>(pipeline_config_from_json(j));
    CHECK(load.find("stage 'load'") != std::string::npos);

    j = small_config(dir, 3);
    j["output_dir"] = (dir / "data" / "A_returns.csv").string();
    const std::string out = message_of<DataError>(pipeline_config_from_json(j));
    CHECK(out.find("stage 'output'") != std::string::npos);
}
