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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "apkbayes/bayes.hpp"
#include "apkbayes/catalog.hpp"
#include "apkbayes/cli.hpp"
#include "apkbayes/container.hpp"
#include "apkbayes/corpus.hpp"
#include "apkbayes/detect.hpp"
#include "apkbayes/dex.hpp"
#include "apkbayes/error.hpp"
#include "apkbayes/eval.hpp"
#include "apkbayes/manifest.hpp"
#include "apkbayes/rank.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace apkbayes;
using namespace testsupport;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail)
{
    std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) {
        ++failures;
    }
}

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

// Frequencies per 1000 samples (benign, malware), transcribed for the oracle.
struct TrueMarginal {
    const char* id;
    int benign;
    int malware;
};
constexpr TrueMarginal kTable[] = {
    {"getSubscriberId", 42, 742}, {"getDeviceId", 316, 854},   {"getSimSerialNumber", 35, 455},
    {"apk_payload", 89, 537},     {"BOOT_COMPLETED", 69, 482}, {"chmod", 19, 389},
    {"Runtime.exec", 62, 458},    {"abortBroadcast", 4, 328},  {"getLineNumber", 111, 491},
    {"system_app", 4, 292},       {"system_bin", 45, 368},     {"createSubprocess", 0, 169},
    {"getSimOperator", 37, 196},  {"remount", 3, 122},         {"DexClassLoader", 16, 152},
    {"pm_install", 0, 98},        {"getCallState", 10, 119},   {"chown", 5, 107},
    {"jar_payload", 87, 252},     {"mount", 29, 152},          {"KeySpec", 99, 254},
    {"system_bin_sh", 4, 90},     {"SMSReceiver", 3, 66},      {"getNetworkOperator", 202, 353},
    {"SecretKey", 119, 248},
};

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun cli(const std::vector<std::string>& args)
{
    std::ostringstream out;
    std::ostringstream err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("apkbayes-acceptance-" + name)).string();
}

// ----------------------------------------------------------------------

void mi_oracle_check()
{
    std::mt19937_64 rng(1);
    const int tables = 5000;
    std::vector<Contingency> cases;
    for (int i = 0; i < tables; ++i) {
        std::uint64_t scale = rng() % 3 == 0 ? 10 : (rng() % 2 ? 1000 : 100000);
        Contingency c{rng() % scale, rng() % scale, rng() % scale, rng() % scale};
        if (c.suspicious() == 0) c.n01 = 1;
        if (c.benign() == 0) c.n00 = 1;
        if (i % 7 == 0) c.n10 = 0;
        if (i % 11 == 0) c.n11 = 0;
        if (c.suspicious() == 0) c.n01 = 1;
        if (c.benign() == 0) c.n00 = 1;
        cases.push_back(c);
    }
    cases.push_back({742, 42, 258, 958});
    auto t0 = Clock::now();
    std::vector<double> got;
    for (const auto& c : cases) {
        got.push_back(mutual_information(c));
    }
    double elapsed = seconds_since(t0);
    double worst = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& c = cases[i];
        worst = std::max(worst, std::abs(got[i] - static_cast<double>(mi_oracle(c.n11, c.n10, c.n01, c.n00))));
    }
    report(worst <= 1e-12 && elapsed < 1.0, "mi-oracle",
           fmt("%.0f tables, max |diff| %.3g, %.3f s", static_cast<double>(cases.size()), worst, elapsed));
}

void posterior_oracle_check()
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.001, 0.999);
    double worst = 0;
    double worst_norm = 0;
    const int cases = 20000;
    auto t0 = Clock::now();
    for (int i = 0; i < cases; ++i) {
        BayesModel m;
        std::size_t n = rng() % 26;
        m.prior_suspicious = u(rng);
        m.prior_benign = 1 - m.prior_suspicious;
        std::vector<long double> ps;
        std::vector<long double> pb;
        for (std::size_t f = 0; f < n; ++f) {
            m.selected_features.push_back("f" + std::to_string(f));
            m.likelihood.push_back({u(rng), u(rng)});
            ps.push_back(m.likelihood.back().suspicious);
            pb.push_back(m.likelihood.back().benign);
        }
        FeatureBits bits(n);
        for (std::size_t f = 0; f < n; ++f) {
            bits[f] = (rng() & 1) != 0;
        }
        double p = posterior(m, bits);
        worst = std::max(worst, std::abs(p - static_cast<double>(posterior_oracle(m.prior_suspicious, m.prior_benign, ps, pb, bits))));

        BayesModel swapped = m;
        std::swap(swapped.prior_suspicious, swapped.prior_benign);
        for (auto& l : swapped.likelihood) {
            std::swap(l.suspicious, l.benign);
        }
        worst_norm = std::max(worst_norm, std::abs(p + posterior(swapped, bits) - 1));
    }
    double elapsed = seconds_since(t0);
    report(worst <= 1e-9 && worst_norm <= 1e-12 && elapsed < 1.0, "posterior-oracle",
           fmt("%.0f vectors, max |diff| %.3g, max |P(s)+P(b)-1| %.3g, %.3f s", cases, worst, worst_norm, elapsed));
}

void metric_identities_check()
{
    std::mt19937_64 rng(3);
    double worst = 0;
    for (int i = 0; i < 10000; ++i) {
        ConfusionCounts c{1 + rng() % 100000, rng() % 100000, rng() % 100000, 1 + rng() % 100000};
        auto r = metrics(c);
        worst = std::max({worst, std::abs(*r.acc + *r.err - 1), std::abs(*r.tpr + *r.fnr - 1),
                          std::abs(*r.tnr + *r.fpr - 1)});
    }
    auto hand = metrics({190, 10, 20, 180});
    bool exact = hand.acc && *hand.acc == 0.925;
    report(worst <= 1e-12 && exact, "metric-identities",
           fmt("10000 matrices, max deviation %.3g; hand case acc %.17g", worst, hand.acc.value_or(-1)));
}

void auc_check()
{
    using L = Label;
    double perfect = roc_auc(std::vector<double>{0.9, 0.8, 0.3, 0.2}, std::vector<L>{L::Suspicious, L::Suspicious, L::Benign, L::Benign});
    double ties = roc_auc(std::vector<double>(6, 0.4), std::vector<L>{L::Suspicious, L::Benign, L::Suspicious, L::Benign, L::Benign, L::Suspicious});
    double pairs = roc_auc(std::vector<double>{0.9, 0.8, 0.7, 0.1}, std::vector<L>{L::Suspicious, L::Benign, L::Suspicious, L::Benign});

    std::mt19937_64 rng(4);
    std::normal_distribution<double> noise;
    bool invariant = true;
    for (int round = 0; round < 200; ++round) {
        std::vector<double> s;
        std::vector<L> t;
        for (int i = 0; i < 300; ++i) {
            bool sus = i % 2 == 0;
            t.push_back(sus ? L::Suspicious : L::Benign);
            s.push_back(std::round((noise(rng) + (sus ? 1.0 : 0.0)) * 8) / 8);
        }
        double base = roc_auc(s, t);
        for (const std::function<double(double)>& g :
             std::vector<std::function<double(double)>>{[](double x) { return std::exp(x); },
                                                        [](double x) { return 3 * x - 1; },
                                                        [](double x) { return 1 / (1 + std::exp(-x)); },
                                                        [](double x) { return x * x * x; }}) {
            std::vector<double> w(s.size());
            std::transform(s.begin(), s.end(), w.begin(), g);
            invariant = invariant && roc_auc(w, t) == base;
        }
    }
    report(perfect == 1.0 && ties == 0.5 && pairs == 0.75 && invariant, "auc",
           fmt("perfect %.17g, ties %.17g, pairs %.17g, monotone invariance ", perfect, ties, pairs) + (invariant ? "ok" : "broken"));
}

/// Bayes-optimal accuracy under the true generative model, by Monte Carlo.
double bayes_optimal_accuracy(std::size_t samples, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        bool sus = i % 2 == 1;
        long double joint_s = 0.5L;
        long double joint_b = 0.5L;
        for (const auto& f : kTable) {
            long double pb = f.benign / 1000.0L;
            long double ps = f.malware / 1000.0L;
            bool bit = std::bernoulli_distribution(static_cast<double>(sus ? ps : pb))(rng);
            joint_s *= bit ? ps : 1 - ps;
            joint_b *= bit ? pb : 1 - pb;
        }
        bool predicted_sus = joint_s >= joint_b;
        correct += predicted_sus == sus ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(samples);
}

nlohmann::json evaluate_json(const std::string& store, std::vector<std::string> extra)
{
    std::vector<std::string> args{"evaluate", store, "--folds", "5", "--seed", "7", "--format", "json"};
    args.insert(args.end(), extra.begin(), extra.end());
    auto r = cli(args);
    if (r.code != 0) {
        throw std::runtime_error("evaluate failed: " + r.err);
    }
    return nlohmann::json::parse(r.out);
}

void synthetic_reproduction_check(const std::string& store)
{
    bool table_matches = true;
    auto marginals = default_marginals();
    for (std::size_t i = 0; i < std::size(kTable); ++i) {
        table_matches = table_matches && marginals.features[i].id == kTable[i].id
            && marginals.features[i].p_benign == kTable[i].benign / 1000.0
            && marginals.features[i].p_suspicious == kTable[i].malware / 1000.0;
    }
    auto t0 = Clock::now();
    auto row = evaluate_json(store, {"--top", "20"})[0];
    double elapsed = seconds_since(t0);
    double acc = row["ACC"].get<double>();
    double auc = row["AUC"].get<double>();
    double oracle = bayes_optimal_accuracy(100000, 2026);
    bool ok = table_matches && std::abs(acc - oracle) <= 0.02 && auc > 0.95 && elapsed < 30;
    report(ok, "synthetic-reproduction",
           fmt("ACC %.6f vs Bayes-optimal %.6f (|diff| %.4f), AUC %.6f", acc, oracle, std::abs(acc - oracle), auc)
               + fmt(", %.3f s", elapsed) + (table_matches ? "" : ", marginals differ from reference table"));
}

void ranking_direction_check(const std::string& store)
{
    auto rows = evaluate_json(store, {"--ranks", "1-5", "--ranks", "16-20"});
    double top = rows[0]["ACC"].get<double>();
    double low = rows[1]["ACC"].get<double>();
    report(top > low, "ranking-direction", fmt("ranks 1-5 ACC %.6f, ranks 16-20 ACC %.6f", top, low));
}

void zero_vector_check(const std::string& store_path)
{
    std::ifstream in(store_path, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto store = load_store(text);
    auto catalog = default_catalog();
    bool ok = true;
    std::string detail;
    for (std::size_t k = 1; k <= 5; ++k) {
        auto sel = select_features(store.profiles, catalog, FeatureSpec::top(k));
        auto model = train(store.profiles, catalog, sel);
        auto v = classify(model, FeatureBits(k, false));
        ok = ok && v.label == Label::Benign;
        detail += fmt("%.0f:%.4f ", static_cast<double>(k), v.posterior_suspicious);
    }
    report(ok, "zero-vector-benign", "P(suspicious|0) for k=1..5: " + detail);
}

enum class Outcome { Parsed, TypedError, Foreign };

Outcome attempt(const std::function<void()>& f)
{
    try {
        f();
        return Outcome::Parsed;
    } catch (const Error&) {
        return Outcome::TypedError;
    } catch (...) {
        return Outcome::Foreign;
    }
}

Bytes mutate(const Bytes& seed, std::mt19937_64& rng)
{
    Bytes b = seed;
    switch (rng() % 5) {
    case 0:  // truncate
        b.resize(rng() % (b.size() + 1));
        break;
    case 1:  // flip a few bytes
        for (int i = 0, n = 1 + static_cast<int>(rng() % 8); i < n && !b.empty(); ++i) {
            b[rng() % b.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
        }
        break;
    case 2:  // overwrite a 32-bit field with an extreme value
        if (b.size() >= 4) {
            auto at = (rng() % (b.size() - 3)) & ~std::size_t{3};
            std::uint32_t extremes[] = {0, 0xffffffff, 0x7fffffff, 0x80000000,
                                        static_cast<std::uint32_t>(b.size()), static_cast<std::uint32_t>(rng())};
            set32(b, at, extremes[rng() % 6]);
        }
        break;
    case 3:  // insert or delete a span
        if (!b.empty()) {
            auto at = rng() % b.size();
            if (rng() & 1) {
                b.erase(b.begin() + static_cast<std::ptrdiff_t>(at),
                        b.begin() + static_cast<std::ptrdiff_t>(std::min(b.size(), at + 1 + rng() % 16)));
            } else {
                Bytes junk(1 + rng() % 16);
                for (auto& j : junk) j = static_cast<std::uint8_t>(rng());
                b.insert(b.begin() + static_cast<std::ptrdiff_t>(at), junk.begin(), junk.end());
            }
        }
        break;
    default:  // random bytes of the same length
        for (auto& x : b) {
            if (rng() % 16 == 0) x = static_cast<std::uint8_t>(rng());
        }
        break;
    }
    return b;
}

void fuzz_check()
{
    DexSpec spec{{"Landroid/telephony/TelephonyManager;", "Ljava/lang/Runtime;", "exec", "getSubscriberId",
                  "caf\xc3\xa9 \xf0\x9f\x98\x80", "chmod 777 /data"},
                 {0, 1}, {{0, 3}, {1, 2}}, "035"};
    const Bytes dex = build_dex(spec);
    const Bytes manifest16 = AxmlWriter(false).write(manifest_tree("com.f", {"android.permission.SEND_SMS"}, {"android.intent.action.BOOT_COMPLETED"}));
    const Bytes manifest8 = AxmlWriter(true).write(manifest_tree("com.f", {"android.permission.SEND_SMS"}, {"android.intent.action.BOOT_COMPLETED"}));
    const Bytes plain = to_bytes(manifest_plaintext("com.f", {"android.permission.SEND_SMS"}, {"android.intent.action.BOOT_COMPLETED"}));
    const Bytes zip = build_zip({{"classes.dex", dex, true}, {"AndroidManifest.xml", manifest16, true},
                                 {"assets/a.sh", to_bytes("chmod 777 x"), false}, {"assets/p.apk", to_bytes("inner"), true}});
    const auto catalog = default_catalog();

    std::mt19937_64 rng(8);
    std::size_t cases = 0;
    std::size_t typed = 0;
    std::size_t parsed = 0;
    std::size_t foreign = 0;
    auto tally_outcome = [&](Outcome o) {
        ++cases;
        if (o == Outcome::Parsed) ++parsed;
        if (o == Outcome::TypedError) ++typed;
        if (o == Outcome::Foreign) ++foreign;
    };

    // Every truncation of every seed.
    for (const Bytes* seed : {&dex, &manifest16, &manifest8, &plain, &zip}) {
        for (std::size_t n = 0; n < seed->size(); ++n) {
            Bytes cut(seed->begin(), seed->begin() + static_cast<std::ptrdiff_t>(n));
            if (seed == &dex) tally_outcome(attempt([&] { parse_dex(cut); }));
            else if (seed == &zip) tally_outcome(attempt([&] { ApkArchive::open(cut, "f"); }));
            else tally_outcome(attempt([&] { parse_manifest(cut); }));
        }
    }
    // Random corruptions.
    for (int i = 0; i < 4000; ++i) {
        auto b = mutate(dex, rng);
        tally_outcome(attempt([&] { parse_dex(b); }));
    }
    for (int i = 0; i < 4000; ++i) {
        auto b = mutate(i % 3 == 0 ? manifest8 : i % 3 == 1 ? manifest16 : plain, rng);
        tally_outcome(attempt([&] { parse_manifest(b); }));
    }
    for (int i = 0; i < 4000; ++i) {
        auto b = mutate(zip, rng);
        tally_outcome(attempt([&] {
            auto archive = ApkArchive::open(b, "f");
            for (const auto& e : archive.entries()) {
                attempt([&] { archive.read_entry(e); });
            }
            analyze_archive(archive, catalog);
        }));
    }
    report(cases >= 10000 && foreign == 0, "parser-robustness",
           fmt("%.0f cases: %.0f typed errors, %.0f parsed, %.0f untyped failures", static_cast<double>(cases),
               static_cast<double>(typed), static_cast<double>(parsed), static_cast<double>(foreign))
#if defined(__SANITIZE_ADDRESS__)
               + ", address sanitizer on"
#endif
    );
}

void end_to_end_check()
{
    auto catalog = default_catalog();
    auto profile = run_detectors(ApkArchive::open_file(APKBAYES_FIXTURE_DIR "/e2e.apk"), catalog);
    std::vector<std::string> set;
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        if (profile.bits[i]) {
            set.push_back(catalog.features[i].id);
        }
    }
    std::vector<std::string> expected{"getSubscriberId", "apk_payload", "BOOT_COMPLETED", "chmod"};
    std::string got;
    for (const auto& s : set) {
        got += (got.empty() ? "" : ",") + s;
    }
    report(set == expected, "end-to-end-fixture", "bits set: " + got);
}

}  // namespace

int main()
{
    auto store = scratch("synth.store");
    auto gen = cli({"synth", "--benign", "1000", "--suspicious", "1000", "--seed", "2026", "-o", store});
    if (gen.code != 0) {
        std::printf("FAIL  setup                        %s\n", gen.err.c_str());
        return 1;
    }

    std::vector<std::pair<const char*, std::function<void()>>> checks{
        {"mi-oracle", mi_oracle_check},
        {"posterior-oracle", posterior_oracle_check},
        {"metric-identities", metric_identities_check},
        {"auc", auc_check},
        {"synthetic-reproduction", [&] { synthetic_reproduction_check(store); }},
        {"ranking-direction", [&] { ranking_direction_check(store); }},
        {"zero-vector-benign", [&] { zero_vector_check(store); }},
        {"parser-robustness", fuzz_check},
        {"end-to-end-fixture", end_to_end_check},
    };
    for (const auto& [name, check] : checks) {
        try {
            check();
        } catch (const std::exception& e) {
            report(false, name, std::string("threw: ") + e.what());
        }
    }
    std::printf("%d of %zu criteria failed\n", failures, checks.size());
    return failures == 0 ? 0 : 1;
}
