// SPDX-License-Identifier: Apache-2.0
//
// nuvdoa: sparse Bayesian direction-of-arrival estimation for uniform linear arrays
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "nuvdoa/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

namespace nuvdoa
{

using nlohmann::json;

namespace
{

json number(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

double to_double(const json &j)
{
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

// Reads an object field by field and rejects keys nobody asked for.
class ObjectReader
{
public:
    ObjectReader(const json &j, std::string where) : j_(j), where_(std::move(where))
    {
        if (!j_.is_object())
            throw ConfigError(where_ + ": expected a JSON object");
    }

    bool has(const std::string &key)
    {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json &raw(const std::string &key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

    template <class T> void read(const std::string &key, T &out)
    {
        if (!has(key))
            return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception &e) {
            throw ConfigError(where_ + "." + key + ": " + e.what());
        }
    }

    void finish() const
    {
        for (const auto &item : j_.items())
            if (!seen_.count(item.key()))
                throw ConfigError(where_ + ": unknown key '" + item.key() + "'");
    }

private:
    const json &j_;
    std::string where_;
    std::set<std::string> seen_;
};

SourceModel source_model_from_string(const std::string &s)
{
    if (s == "noncoherent")
        return SourceModel::noncoherent;
    if (s == "coherent")
        return SourceModel::coherent;
    throw ConfigError("unknown source_model '" + s + "'");
}

const char *to_string(SourceModel m)
{
    return m == SourceModel::coherent ? "coherent" : "noncoherent";
}

DoaSampling sampling_from_json(const json &j)
{
    DoaSampling s;
    ObjectReader r(j, "doa_sampling");
    if (r.has("preset")) {
        const auto preset = r.raw("preset").get<std::string>();
        if (preset == "mid_interval")
            s = mid_interval_sampling();
        else if (preset == "boundary")
            s = boundary_sampling();
        else
            throw ConfigError("doa_sampling.preset: unknown preset '" + preset + "'");
    }
    std::string mode = s.mode == DoaSampling::Mode::fixed ? "fixed" : "uniform_range";
    r.read("mode", mode);
    if (mode == "fixed")
        s.mode = DoaSampling::Mode::fixed;
    else if (mode == "uniform_range")
        s.mode = DoaSampling::Mode::uniform_range;
    else
        throw ConfigError("doa_sampling.mode: unknown mode '" + mode + "'");
    r.read("fixed_deg", s.fixed_deg);
    r.read("lo_deg", s.lo_deg);
    r.read("hi_deg", s.hi_deg);
    if (r.has("separation_deg") && !r.raw("separation_deg").is_null())
        s.separation_deg = r.raw("separation_deg").get<double>();
    r.read("min_separation_deg", s.min_separation_deg);
    r.read("on_grid", s.on_grid);
    r.read("symmetric", s.symmetric);
    r.finish();
    if (s.mode == DoaSampling::Mode::uniform_range)
        s.fixed_deg.clear();
    return s;
}

json sampling_to_json(const DoaSampling &s)
{
    json j;
    j["mode"] = s.mode == DoaSampling::Mode::fixed ? "fixed" : "uniform_range";
    if (s.mode == DoaSampling::Mode::fixed)
        j["fixed_deg"] = s.fixed_deg;
    j["lo_deg"] = s.lo_deg;
    j["hi_deg"] = s.hi_deg;
    j["separation_deg"] = s.separation_deg ? json(*s.separation_deg) : json(nullptr);
    j["min_separation_deg"] = s.min_separation_deg;
    j["on_grid"] = s.on_grid;
    j["symmetric"] = s.symmetric;
    return j;
}

void solver_from_json(const json &j, ScenarioConfig &config)
{
    ObjectReader r(j, "solver");
    if (r.has("sigma2")) {
        r.read("sigma2", config.solver.sigma2);
        config.sigma2_table.reset();
    }
    r.read("max_iterations", config.solver.max_iterations);
    r.read("tolerance", config.solver.tolerance);
    if (r.has("init")) {
        ObjectReader init(r.raw("init"), "solver.init");
        std::string kind = "random_uniform";
        init.read("kind", kind);
        if (kind == "random_uniform") {
            RandomUniformInit ri;
            init.read("seed", ri.seed);
            config.solver.init = ri;
        } else if (kind == "constant") {
            ConstantInit ci;
            init.read("value", ci.value);
            config.solver.init = ci;
        } else {
            throw ConfigError("solver.init.kind: unknown kind '" + kind + "'");
        }
        init.finish();
    }
    r.finish();
}

json solver_to_json(const ScenarioConfig &config)
{
    json j;
    if (!config.sigma2_table)
        j["sigma2"] = config.solver.sigma2;
    j["max_iterations"] = config.solver.max_iterations;
    j["tolerance"] = config.solver.tolerance;
    if (const auto *c = std::get_if<ConstantInit>(&config.solver.init))
        j["init"] = {{"kind", "constant"}, {"value", c->value}};
    else
        j["init"] = {{"kind", "random_uniform"}, {"seed", std::get<RandomUniformInit>(config.solver.init).seed}};
    return j;
}

template <class T> T checked_get(const json &j, const char *what)
{
    try {
        return j.get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

} // namespace

ScenarioConfig config_from_json(const json &j)
{
    ScenarioConfig c;
    ObjectReader r(j, "config");
    int version = kSchemaVersion;
    r.read("schema_version", version);
    if (version > kSchemaVersion)
        throw ConfigError("config: unsupported schema_version " + std::to_string(version));

    r.read("n_sensors", c.n_sensors);
    r.read("n_sources", c.n_sources);
    r.read("n_snapshots", c.n_snapshots);
    r.read("snr_db", c.snr_db);
    if (r.has("source_model"))
        c.source_model = source_model_from_string(checked_get<std::string>(r.raw("source_model"), "source_model"));
    if (r.has("methods")) {
        c.methods.clear();
        for (const auto &m : checked_get<std::vector<std::string>>(r.raw("methods"), "methods"))
            c.methods.push_back(method_from_string(m));
    }
    r.read("trials", c.trials);
    r.read("seed", c.seed);
    r.read("snr_sweep", c.snr_sweep);
    if (r.has("doa_sampling"))
        c.doa_sampling = sampling_from_json(r.raw("doa_sampling"));
    if (r.has("solver"))
        solver_from_json(r.raw("solver"), c);
    if (r.has("sigma2_table")) {
        const auto &t = r.raw("sigma2_table");
        if (t.is_null())
            c.sigma2_table.reset();
        else if (t.is_string() && t.get<std::string>() == "default")
            c.sigma2_table = default_sigma2_table();
        else
            c.sigma2_table = sigma2_table_from_json(t);
    }
    r.read("sigma2_candidates", c.sigma2_candidates);
    if (r.has("pipeline")) {
        ObjectReader p(r.raw("pipeline"), "pipeline");
        p.read("snr_gate_db", c.snr_gate_db);
        p.read("coarse_grid_cells", c.coarse_grid_cells);
        p.read("fine_step_deg", c.fine_step_deg);
        p.read("alpha_deg", c.alpha_deg);
        p.read("use_known_snr", c.use_known_snr);
        if (p.has("error_table")) {
            const auto &t = p.raw("error_table");
            if (t.is_string() && t.get<std::string>() == "default")
                c.error_table = default_error_table();
            else
                c.error_table = error_table_from_json(t);
        }
        p.finish();
    }
    r.read("grid_cells", c.grid_cells);
    if (r.has("mvdr_load") && !r.raw("mvdr_load").is_null())
        c.mvdr_load = checked_get<double>(r.raw("mvdr_load"), "mvdr_load");
    r.read("detection_threshold_deg", c.detection_threshold_deg);
    r.read("record_timing", c.record_timing);
    r.read("workers", c.workers);
    r.finish();
    c.validate();
    return c;
}

json config_to_json(const ScenarioConfig &c)
{
    json j;
    j["schema_version"] = kSchemaVersion;
    j["n_sensors"] = c.n_sensors;
    j["n_sources"] = c.n_sources;
    j["n_snapshots"] = c.n_snapshots;
    j["snr_db"] = c.snr_db;
    j["source_model"] = to_string(c.source_model);
    j["methods"] = json::array();
    for (auto m : c.methods)
        j["methods"].push_back(to_string(m));
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["snr_sweep"] = c.snr_sweep;
    j["doa_sampling"] = sampling_to_json(c.doa_sampling);
    j["solver"] = solver_to_json(c);
    j["sigma2_table"] = c.sigma2_table ? sigma2_table_to_json(*c.sigma2_table) : json(nullptr);
    j["sigma2_candidates"] = c.sigma2_candidates;
    j["pipeline"] = {{"snr_gate_db", c.snr_gate_db},
                     {"coarse_grid_cells", c.coarse_grid_cells},
                     {"fine_step_deg", c.fine_step_deg},
                     {"alpha_deg", c.alpha_deg},
                     {"use_known_snr", c.use_known_snr},
                     {"error_table", error_table_to_json(c.error_table)}};
    j["grid_cells"] = c.grid_cells;
    j["mvdr_load"] = c.mvdr_load ? json(*c.mvdr_load) : json(nullptr);
    j["detection_threshold_deg"] = c.detection_threshold_deg;
    j["record_timing"] = c.record_timing;
    j["workers"] = c.workers;
    return j;
}

ScenarioConfig load_config(const std::filesystem::path &path)
{
    return config_from_json(read_json_file(path));
}

json record_to_json(const TrialRecord &r)
{
    auto numbers = [](const std::vector<double> &v) {
        json a = json::array();
        for (double x : v)
            a.push_back(number(x));
        return a;
    };
    return {{"trial_index", r.trial_index},
            {"seed", r.seed},
            {"method", r.method},
            {"snr_db", r.snr_db},
            {"true_doas_deg", numbers(r.true_doas_deg)},
            {"estimates_deg", numbers(r.estimates_deg)},
            {"matched_errors_deg", numbers(r.matched_errors_deg)},
            {"runtime_ms", number(r.runtime_ms)},
            {"failed", r.failed},
            {"flags", r.flags}};
}

TrialRecord record_from_json(const json &j)
{
    auto numbers = [](const json &a) {
        std::vector<double> v;
        for (const auto &x : a)
            v.push_back(to_double(x));
        return v;
    };
    try {
        TrialRecord r;
        r.trial_index = j.at("trial_index").get<int>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.method = j.at("method").get<std::string>();
        r.snr_db = to_double(j.at("snr_db"));
        r.true_doas_deg = numbers(j.at("true_doas_deg"));
        r.estimates_deg = numbers(j.at("estimates_deg"));
        r.matched_errors_deg = numbers(j.at("matched_errors_deg"));
        r.runtime_ms = to_double(j.at("runtime_ms"));
        r.failed = j.at("failed").get<bool>();
        r.flags = j.at("flags").get<std::vector<std::string>>();
        return r;
    } catch (const json::exception &e) {
        throw ConfigError(std::string("trial record: ") + e.what());
    }
}

void write_reports_jsonl(std::ostream &out, const std::vector<RunReport> &reports)
{
    for (const auto &rep : reports) {
        const auto &a = rep.aggregates;
        json header = {{"kind", "report"},
                       {"schema_version", kSchemaVersion},
                       {"method", rep.method},
                       {"snr_db", rep.snr_db},
                       {"n_snapshots", rep.n_snapshots},
                       {"n_sources", rep.n_sources},
                       {"detection_threshold_deg", rep.detection_threshold_deg},
                       {"trials", rep.records.size()},
                       {"aggregates",
                        {{"rmse_deg", number(a.rmse_deg)},
                         {"median_abs_error_deg", number(a.median_abs_error_deg)},
                         {"detection_rate", number(a.detection_rate)},
                         {"false_alarm_count", a.false_alarm_count},
                         {"runtime_ms_mean", number(a.runtime_ms_mean)},
                         {"failed_trials", a.failed_trials}}}};
        out << header.dump() << '\n';
        for (const auto &r : rep.records) {
            auto line = record_to_json(r);
            line["kind"] = "trial";
            out << line.dump() << '\n';
        }
    }
}

std::vector<RunReport> read_reports_jsonl(std::istream &in)
{
    std::vector<RunReport> reports;
    std::vector<std::size_t> expected;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception &e) {
            throw ConfigError("report line " + std::to_string(line_no) + ": " + e.what());
        }
        const auto kind = j.value("kind", std::string());
        if (kind == "report") {
            RunReport rep;
            try {
                rep.method = j.at("method").get<std::string>();
                rep.snr_db = to_double(j.at("snr_db"));
                rep.n_snapshots = j.at("n_snapshots").get<int>();
                rep.n_sources = j.at("n_sources").get<int>();
                rep.detection_threshold_deg = j.at("detection_threshold_deg").get<double>();
                const auto &a = j.at("aggregates");
                rep.aggregates.rmse_deg = to_double(a.at("rmse_deg"));
                rep.aggregates.median_abs_error_deg = to_double(a.at("median_abs_error_deg"));
                rep.aggregates.detection_rate = to_double(a.at("detection_rate"));
                rep.aggregates.false_alarm_count = a.at("false_alarm_count").get<int>();
                rep.aggregates.runtime_ms_mean = to_double(a.at("runtime_ms_mean"));
                rep.aggregates.failed_trials = a.at("failed_trials").get<int>();
                expected.push_back(j.at("trials").get<std::size_t>());
            } catch (const json::exception &e) {
                throw ConfigError("report line " + std::to_string(line_no) + ": " + e.what());
            }
            reports.push_back(std::move(rep));
        } else if (kind == "trial") {
            if (reports.empty())
                throw ConfigError("report line " + std::to_string(line_no) + ": trial before any report header");
            reports.back().records.push_back(record_from_json(j));
        } else {
            throw ConfigError("report line " + std::to_string(line_no) + ": unknown kind '" + kind + "'");
        }
    }
    for (std::size_t i = 0; i < reports.size(); ++i) {
        if (reports[i].records.size() != expected[i])
            throw ConfigError("report " + std::to_string(i) + ": trial count does not match the header");
        if (!aggregates_consistent(reports[i]))
            throw ConfigError("report " + std::to_string(i) + ": aggregates disagree with the trial records");
    }
    return reports;
}

void write_aggregate_csv(std::ostream &out, const std::vector<RunReport> &reports)
{
    out << "method,snr_db,L,K,trials,rmse_deg,median_abs_error_deg,detection_rate,runtime_ms_mean\n";
    char buf[512];
    for (const auto &r : reports) {
        const auto &a = r.aggregates;
        std::snprintf(buf, sizeof buf, "%s,%.17g,%d,%d,%zu,%.17g,%.17g,%.17g,%.17g\n", r.method.c_str(), r.snr_db,
                      r.n_snapshots, r.n_sources, r.records.size(), a.rmse_deg, a.median_abs_error_deg,
                      a.detection_rate, a.runtime_ms_mean);
        out << buf;
    }
}

void write_spectrum_csv(std::ostream &out, const Spectrum &spectrum)
{
    out << "angle_deg,magnitude\n";
    char buf[96];
    for (std::size_t i = 0; i < spectrum.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", rad_to_deg(spectrum.grid[i]), spectrum.values[i]);
        out << buf;
    }
}

void write_snapshots_jsonl(std::ostream &out, const Scenario &scenario, std::uint64_t seed,
                           const SnapshotBatch &batch)
{
    std::vector<double> doas_deg;
    for (double t : scenario.true_doas)
        doas_deg.push_back(rad_to_deg(t));
    json header = {{"kind", "scenario"},
                   {"schema_version", kSchemaVersion},
                   {"seed", seed},
                   {"n_sensors", batch.n_sensors()},
                   {"n_snapshots", batch.n_snapshots()},
                   {"true_doas_deg", doas_deg},
                   {"snr_db", scenario.snr_db},
                   {"noise_variance", scenario.noise_variance},
                   {"source_model", to_string(scenario.source_model)}};
    out << header.dump() << '\n';
    const auto &y = batch.snapshots();
    for (Eigen::Index l = 0; l < y.cols(); ++l) {
        std::vector<double> re(static_cast<std::size_t>(y.rows())), im(re.size());
        for (Eigen::Index n = 0; n < y.rows(); ++n) {
            re[static_cast<std::size_t>(n)] = y(n, l).real();
            im[static_cast<std::size_t>(n)] = y(n, l).imag();
        }
        out << json{{"kind", "snapshot"}, {"index", l}, {"re", re}, {"im", im}}.dump() << '\n';
    }
}

json error_table_to_json(const ErrorStdTable &table)
{
    json entries = json::array();
    for (const auto &e : table.entries())
        entries.push_back({{"snr_db", e.snr_db},
                           {"epsilon_deg", rad_to_deg(e.epsilon)},
                           {"trials", e.trials},
                           {"low_confidence", e.low_confidence}});
    return {{"schema_version", kSchemaVersion}, {"fallback_deg", rad_to_deg(table.fallback())}, {"entries", entries}};
}

ErrorStdTable error_table_from_json(const json &j)
{
    try {
        std::vector<ErrorStdEntry> entries;
        for (const auto &e : j.at("entries"))
            entries.push_back({e.at("snr_db").get<double>(), deg_to_rad(e.at("epsilon_deg").get<double>()),
                               e.value("trials", 0), e.value("low_confidence", false)});
        return ErrorStdTable(std::move(entries), deg_to_rad(j.value("fallback_deg", 1.0)));
    } catch (const json::exception &e) {
        throw ConfigError(std::string("error table: ") + e.what());
    } catch (const DomainError &e) {
        throw ConfigError(std::string("error table: ") + e.what());
    }
}

json sigma2_table_to_json(const Sigma2Table &table)
{
    json entries = json::array();
    for (const auto &e : table.entries())
        entries.push_back({{"snr_db", e.snr_db}, {"sigma2", e.sigma2}});
    return {{"schema_version", kSchemaVersion}, {"entries", entries}};
}

Sigma2Table sigma2_table_from_json(const json &j)
{
    try {
        std::vector<Sigma2Entry> entries;
        for (const auto &e : j.at("entries"))
            entries.push_back({e.at("snr_db").get<double>(), e.at("sigma2").get<double>()});
        return Sigma2Table(std::move(entries));
    } catch (const json::exception &e) {
        throw ConfigError(std::string("sigma2 table: ") + e.what());
    } catch (const DomainError &e) {
        throw ConfigError(std::string("sigma2 table: ") + e.what());
    }
}

json sigma2_choices_to_json(const std::vector<Sigma2Choice> &choices, const std::vector<double> &candidates)
{
    json j = sigma2_table_to_json(to_table(choices));
    for (std::size_t i = 0; i < choices.size(); ++i) {
        json rmse = json::array();
        for (double r : choices[i].candidate_rmse_deg)
            rmse.push_back(number(r));
        j["entries"][i]["candidates"] = candidates;
        j["entries"][i]["candidate_rmse_deg"] = rmse;
    }
    return j;
}

json read_json_file(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path &path, const json &j)
{
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace nuvdoa
