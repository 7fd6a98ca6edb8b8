/*
 * Copyright (C) 2026 The apkbayes Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "apkbayes/cli.hpp"
#include "apkbayes/text.hpp"

using namespace apkbayes;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args)
{
    std::ostringstream out;
    std::ostringstream err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string scratch_dir()
{
    auto dir = std::filesystem::temp_directory_path() / "apkbayes-cli-test";
    std::filesystem::create_directories(dir);
    return dir.string();
}

std::string synth_store()
{
    static const std::string path = [] {
        auto p = scratch_dir() + "/synth.store";
        REQUIRE(cli({"synth", "--seed", "5", "-o", p}).code == 0);
        return p;
    }();
    return path;
}

}  // namespace

TEST_CASE("evaluate prints the eight metric columns")
{
    auto r = cli({"evaluate", synth_store(), "--folds", "5", "--top", "20", "--seed", "7"});
    REQUIRE(r.code == 0);
    auto lines = split_lines(r.out);
    REQUIRE(lines.size() >= 2);
    std::istringstream header{std::string(lines[0])};
    std::vector<std::string> cols;
    for (std::string c; header >> c;) {
        cols.push_back(c);
    }
    CHECK(cols == std::vector<std::string>{"features", "ERR", "ACC", "TNR", "FPR", "TPR", "FNR", "Prec.", "AUC"});
    CHECK(lines[1].starts_with("20f"));
    CHECK(cli({"evaluate", synth_store(), "--folds", "5", "--top", "20", "--seed", "7"}).out == r.out);
}

TEST_CASE("csv, json and table carry the same numbers")
{
    std::vector<std::string> base{"evaluate", synth_store(), "--top", "5", "--ranks", "16-20", "--seed", "1"};
    auto table = cli(base);
    auto with = [&](const std::string& f) {
        auto a = base;
        a.insert(a.end(), {"--format", f});
        return cli(a).out;
    };
    auto csv = with("csv");
    auto json = nlohmann::json::parse(with("json"));
    REQUIRE(json.size() == 2);
    auto csv_lines = split_lines(csv);
    auto table_lines = split_lines(table.out);
    for (std::size_t row = 0; row < 2; ++row) {
        auto cells = split(csv_lines[row + 1], ',');
        std::istringstream t{std::string(table_lines[row + 1])};
        std::vector<std::string> tcells;
        for (std::string c; t >> c;) {
            tcells.push_back(c);
        }
        REQUIRE(cells.size() == 9);
        std::vector<std::string> keys{"ERR", "ACC", "TNR", "FPR", "TPR", "FNR", "Prec.", "AUC"};
        for (std::size_t k = 0; k < keys.size(); ++k) {
            CHECK(std::string(cells[k + 1]) == tcells[k + 1]);
            CHECK(*parse_double(cells[k + 1]) == json[row][keys[k]].get<double>());
        }
    }
}

TEST_CASE("train then classify a package")
{
    auto dir = scratch_dir();
    auto model = dir + "/m.model";
    REQUIRE(cli({"train", synth_store(), "--top", "10", "-o", model}).code == 0);
    auto r = cli({"classify", APKBAYES_FIXTURE_DIR "/e2e.apk", "--model", model});
    REQUIRE(r.code == 0);
    auto lines = split_lines(r.out);
    REQUIRE(lines.size() >= 2);
    CHECK(lines[1].find("e2e.apk") != std::string_view::npos);
    CHECK((lines[1].find("suspicious") != std::string_view::npos || lines[1].find("benign") != std::string_view::npos));

    auto store_run = cli({"classify", synth_store(), "--model", model, "--format", "csv"});
    REQUIRE(store_run.code == 0);
    CHECK(split_lines(store_run.out).size() == 2001);
}

TEST_CASE("analyze and rank")
{
    auto a = cli({"analyze", APKBAYES_FIXTURE_DIR "/e2e.apk", "--format", "json"});
    REQUIRE(a.code == 0);
    CHECK(nlohmann::json::parse(a.out)["bits"] == "1001110000000000000000000");
    auto r = cli({"rank", synth_store(), "--top", "3", "--format", "csv"});
    REQUIRE(r.code == 0);
    CHECK(split_lines(r.out).size() == 4);
}

TEST_CASE("extract through the command line")
{
    auto dir = scratch_dir();
    std::filesystem::copy_file(APKBAYES_FIXTURE_DIR "/e2e.apk", dir + "/e2e.apk",
                               std::filesystem::copy_options::overwrite_existing);
    {
        std::ofstream m(dir + "/corpus.csv");
        m << "id,label,family\ne2e.apk,suspicious,Demo\nmissing.apk,benign,\n";
    }
    auto r = cli({"extract", dir + "/corpus.csv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.starts_with("#apkbayes-store"));
    CHECK(r.out.find("e2e.apk,suspicious,Demo,1001110000000000000000000") != std::string::npos);
    CHECK(r.err.find("missing.apk") != std::string::npos);
}

TEST_CASE("usage errors")
{
    auto r = cli({"evaluate", "x", "--bogus-flag"});
    CHECK(r.code == kExitInputError);
    CHECK(r.err.find("Usage") != std::string::npos);
    CHECK(cli({}).code == kExitInputError);
    CHECK(cli({"evaluate", synth_store()}).code == kExitInputError);  // --seed is required
    auto missing = cli({"rank", "/nonexistent/store"});
    CHECK(missing.code == kExitInputError);
    CHECK(missing.err.starts_with("error: "));
    CHECK(cli({"--help"}).code == kExitOk);
}
