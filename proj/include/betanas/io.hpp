#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "betanas/bench.hpp"
#include "betanas/search.hpp"
#include "betanas/space.hpp"

namespace betanas::io {

using nlohmann::json;

// %.17g round-trips doubles exactly; all numeric text in CSV outputs goes
// through here so reruns are byte-identical.
inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string ops_csv(const space::SpaceSpec& space) {
    std::string s;
    for (int k = 0; k < space.num_ops(); ++k) {
        if (k) s += ',';
        s += space::op_token(space.ops[static_cast<size_t>(k)]);
    }
    return s;
}

inline std::vector<space::OpKind> ops_from_csv(const std::string& text) {
    std::vector<space::OpKind> ops;
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) ops.push_back(space::op_from_token(token));
    return ops;
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw ConfigError("write to '" + path + "' failed");
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --- trajectory CSV -----------------------------------------------------------

inline const char* trajectory_header() {
    return "epoch,lambda,train_loss,val_loss,reg_loss,genotype,alpha_mean,alpha_median,"
           "alpha_std,beta_total_std,lipschitz_sum,phi";
}

inline std::string trajectory_csv(const search::Trajectory& traj) {
    std::string out;
    out += "# space nodes=" + std::to_string(traj.space.nodes) +
           " width=" + std::to_string(traj.space.width) + " ops=" + ops_csv(traj.space) +
           " classes=" + std::to_string(traj.classes) + "\n";
    out += trajectory_header();
    out += "\n";
    for (const auto& r : traj.records) {
        out += std::to_string(r.epoch);
        out += ',' + csv_num(r.lambda);
        out += ',' + csv_num(r.train_loss);
        out += ',' + csv_num(r.val_loss);
        out += ',' + csv_num(r.reg_loss);
        out += ',' + space::encode_genotype(r.genotype);
        out += ',' + csv_num(r.stats.alpha_mean);
        out += ',' + csv_num(r.stats.alpha_median);
        out += ',' + csv_num(r.stats.alpha_std);
        out += ',' + csv_num(r.stats.beta_total_std);
        out += ',' + csv_num(r.stats.lipschitz_sum);
        out += ',' + csv_num(r.stats.phi);
        out += '\n';
    }
    return out;
}

inline void write_trajectory_csv(const std::string& path, const search::Trajectory& traj) {
    write_text(path, trajectory_csv(traj));
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string token;
    std::istringstream in(s);
    while (std::getline(in, token, sep)) out.push_back(token);
    return out;
}

inline double parse_num(const std::string& s, const std::string& path, int line) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(path + ":" + std::to_string(line) + ": bad number '" + s + "'");
    }
}

// "# space nodes=3 width=8 ops=zero,skip classes=2" -> (SpaceSpec, classes)
inline std::pair<space::SpaceSpec, int> parse_space_comment(const std::string& line,
                                                            const std::string& path,
                                                            int line_no) {
    const std::string prefix = "# space ";
    if (line.rfind(prefix, 0) != 0)
        throw ParseError(path + ":" + std::to_string(line_no) + ": expected '# space ...' header");
    int nodes = 0, width = 0, classes = 0;
    std::vector<space::OpKind> ops;
    std::istringstream in(line.substr(prefix.size()));
    std::string kv;
    while (in >> kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ":" + std::to_string(line_no) + ": bad token '" + kv + "'");
        std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        if (key == "nodes")
            nodes = static_cast<int>(parse_num(val, path, line_no));
        else if (key == "width")
            width = static_cast<int>(parse_num(val, path, line_no));
        else if (key == "classes")
            classes = static_cast<int>(parse_num(val, path, line_no));
        else if (key == "ops")
            ops = ops_from_csv(val);
        else
            throw ParseError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    return {space::build_space(nodes, width, std::move(ops)), classes};
}

}  // namespace detail

// Rebuilds a Trajectory skeleton (space, per-epoch scalars, genotypes, stats;
// no alpha snapshots) from a trajectory CSV.
inline search::Trajectory read_trajectory_csv(const std::string& path) {
    std::istringstream in(read_text(path));
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw ParseError(path + ":1: empty file");
    ++line_no;
    auto [space_spec, classes] = detail::parse_space_comment(line, path, line_no);
    if (!std::getline(in, line)) throw ParseError(path + ":2: missing column header");
    ++line_no;
    if (line != trajectory_header())
        throw ParseError(path + ":" + std::to_string(line_no) + ": unexpected column header");
    search::Trajectory traj;
    traj.space = space_spec;
    traj.classes = classes;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = detail::split(line, ',');
        if (cells.size() != 12)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 12 columns, got " +
                             std::to_string(cells.size()));
        search::EpochRecord r;
        r.epoch = static_cast<int>(detail::parse_num(cells[0], path, line_no));
        r.lambda = detail::parse_num(cells[1], path, line_no);
        r.train_loss = detail::parse_num(cells[2], path, line_no);
        r.val_loss = detail::parse_num(cells[3], path, line_no);
        r.reg_loss = detail::parse_num(cells[4], path, line_no);
        try {
            r.genotype = space::decode_genotype(cells[5], traj.space);
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        r.stats.alpha_mean = detail::parse_num(cells[6], path, line_no);
        r.stats.alpha_median = detail::parse_num(cells[7], path, line_no);
        r.stats.alpha_std = detail::parse_num(cells[8], path, line_no);
        r.stats.beta_total_std = detail::parse_num(cells[9], path, line_no);
        r.stats.lipschitz_sum = detail::parse_num(cells[10], path, line_no);
        r.stats.phi = detail::parse_num(cells[11], path, line_no);
        traj.records.push_back(std::move(r));
    }
    if (traj.records.empty()) throw ParseError(path + ": no epoch rows");
    return traj;
}

// --- alpha snapshots (JSONL) ----------------------------------------------------

inline std::string alpha_snapshots_jsonl(const search::Trajectory& traj) {
    std::string out;
    json header;
    header["type"] = "header";
    header["kind"] = "alpha_snapshots";
    header["nodes"] = traj.space.nodes;
    header["width"] = traj.space.width;
    header["ops"] = detail::split(ops_csv(traj.space), ',');
    header["classes"] = traj.classes;
    header["seed"] = traj.config.seed;
    out += header.dump() + "\n";
    for (const auto& r : traj.records) {
        json rec;
        rec["epoch"] = r.epoch;
        json rows = json::array();
        for (int e = 0; e < r.alpha.num_edges(); ++e) {
            json row = json::array();
            for (int k = 0; k < r.alpha.num_ops(); ++k) row.push_back(r.alpha.at(e, k));
            rows.push_back(std::move(row));
        }
        rec["alpha"] = std::move(rows);
        out += rec.dump() + "\n";
    }
    return out;
}

inline void write_alpha_snapshots(const std::string& path, const search::Trajectory& traj) {
    write_text(path, alpha_snapshots_jsonl(traj));
}

struct SnapshotFile {
    space::SpaceSpec space;
    int classes = 0;
    uint64_t seed = 0;
    std::vector<std::pair<int, supernet::AlphaTable>> epochs;
};

inline SnapshotFile read_alpha_snapshots(const std::string& path) {
    std::istringstream in(read_text(path));
    std::string line;
    int line_no = 0;
    SnapshotFile file;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        try {
            if (!have_header) {
                if (j.value("type", "") != "header" || j.value("kind", "") != "alpha_snapshots")
                    throw ParseError(path + ":" + std::to_string(line_no) +
                                     ": expected alpha_snapshots header");
                std::vector<space::OpKind> ops;
                for (const auto& t : j.at("ops")) ops.push_back(space::op_from_token(t));
                file.space = space::build_space(j.at("nodes").get<int>(),
                                                j.at("width").get<int>(), std::move(ops));
                file.classes = j.at("classes").get<int>();
                file.seed = j.at("seed").get<uint64_t>();
                have_header = true;
                continue;
            }
            int epoch = j.at("epoch").get<int>();
            const auto& rows = j.at("alpha");
            supernet::AlphaTable table(static_cast<int>(rows.size()),
                                       rows.empty() ? 1 : static_cast<int>(rows[0].size()));
            for (size_t e = 0; e < rows.size(); ++e)
                for (size_t k = 0; k < rows[e].size(); ++k)
                    table.at(static_cast<int>(e), static_cast<int>(k)) = rows[e][k].get<double>();
            file.epochs.emplace_back(epoch, std::move(table));
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_header) throw ParseError(path + ": missing header line");
    if (file.epochs.empty()) throw ParseError(path + ": no snapshot lines");
    return file;
}

// --- benchmark table (JSONL) ------------------------------------------------------

inline std::string benchmark_jsonl(const bench::BenchmarkTable& table) {
    std::string out;
    json header;
    header["type"] = "header";
    header["kind"] = "benchmark";
    header["nodes"] = table.space.nodes;
    header["width"] = table.space.width;
    header["ops"] = detail::split(ops_csv(table.space), ',');
    header["dataset"] = {{"kind", table.dataset.kind},     {"n", table.dataset.n},
                         {"width", table.dataset.width},   {"classes", table.dataset.classes},
                         {"noise", table.dataset.noise},   {"seed", table.dataset.seed}};
    header["trainer"] = {{"epochs", table.trainer.epochs},
                         {"eta", table.trainer.eta},
                         {"momentum", table.trainer.momentum}};
    header["seeds"] = table.seeds;
    header["base_seed"] = table.base_seed;
    out += header.dump() + "\n";
    for (const auto& [geno, m] : table.entries) {
        json e;
        e["genotype"] = geno;
        e["val_acc_mean"] = m.val_acc_mean;
        e["val_acc_std"] = m.val_acc_std;
        e["test_acc_mean"] = m.test_acc_mean;
        e["test_acc_std"] = m.test_acc_std;
        e["params"] = m.params;
        e["flagged"] = m.flagged;
        out += e.dump() + "\n";
    }
    return out;
}

inline void write_benchmark(const std::string& path, const bench::BenchmarkTable& table) {
    write_text(path, benchmark_jsonl(table));
}

inline bench::BenchmarkTable read_benchmark(const std::string& path) {
    std::istringstream in(read_text(path));
    std::string line;
    int line_no = 0;
    bench::BenchmarkTable table;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        try {
            if (!have_header) {
                if (j.value("type", "") != "header" || j.value("kind", "") != "benchmark")
                    throw ParseError(path + ":" + std::to_string(line_no) +
                                     ": expected benchmark header");
                std::vector<space::OpKind> ops;
                for (const auto& t : j.at("ops")) ops.push_back(space::op_from_token(t));
                table.space = space::build_space(j.at("nodes").get<int>(),
                                                 j.at("width").get<int>(), std::move(ops));
                const auto& d = j.at("dataset");
                table.dataset = bench::DatasetSpec{
                    d.at("kind").get<std::string>(), d.at("n").get<int>(),
                    d.at("width").get<int>(),        d.at("classes").get<int>(),
                    d.at("noise").get<double>(),     d.at("seed").get<uint64_t>()};
                const auto& t = j.at("trainer");
                table.trainer.epochs = t.at("epochs").get<int>();
                table.trainer.eta = t.at("eta").get<double>();
                table.trainer.momentum = t.at("momentum").get<double>();
                table.seeds = j.at("seeds").get<int>();
                table.base_seed = j.at("base_seed").get<uint64_t>();
                have_header = true;
                continue;
            }
            bench::EntryMetrics m;
            m.val_acc_mean = j.at("val_acc_mean").get<double>();
            m.val_acc_std = j.at("val_acc_std").get<double>();
            m.test_acc_mean = j.at("test_acc_mean").get<double>();
            m.test_acc_std = j.at("test_acc_std").get<double>();
            m.params = j.at("params").get<long long>();
            m.flagged = j.at("flagged").get<bool>();
            table.entries[j.at("genotype").get<std::string>()] = m;
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_header) throw ParseError(path + ": missing header line");
    return table;
}

// --- minimal SVG line charts -------------------------------------------------------

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

// Self-contained line chart: axes, tick labels, one polyline per series,
// small legend. No external assets.
inline std::string svg_chart(const std::string& title, const std::string& x_label,
                             const std::string& y_label, const std::vector<Series>& series) {
    if (series.empty()) throw ConfigError("svg_chart: no series to plot");
    const int w = 720, h = 440, ml = 70, mr = 160, mt = 50, mb = 50;
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            if (first) {
                xmin = xmax = x;
                ymin = ymax = y;
                first = false;
            }
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
    auto sy = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4g", v);
        return std::string(buf);
    };
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
           "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " +
           std::to_string(h) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + std::to_string(w / 2) + "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"monospace\" font-size=\"15\">" + title + "</text>\n";
    svg += "<line x1=\"" + std::to_string(ml) + "\" y1=\"" + std::to_string(h - mb) + "\" x2=\"" +
           std::to_string(w - mr) + "\" y2=\"" + std::to_string(h - mb) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + std::to_string(ml) + "\" y1=\"" + std::to_string(mt) + "\" x2=\"" +
           std::to_string(ml) + "\" y2=\"" + std::to_string(h - mb) + "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        double fx = xmin + (xmax - xmin) * t / 4.0;
        double fy = ymin + (ymax - ymin) * t / 4.0;
        svg += "<text x=\"" + num(sx(fx)) + "\" y=\"" + std::to_string(h - mb + 18) +
               "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">" + num(fx) +
               "</text>\n";
        svg += "<text x=\"" + std::to_string(ml - 8) + "\" y=\"" + num(sy(fy) + 4) +
               "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">" + num(fy) +
               "</text>\n";
    }
    svg += "<text x=\"" + std::to_string((ml + w - mr) / 2) + "\" y=\"" + std::to_string(h - 12) +
           "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">" + x_label +
           "</text>\n";
    svg += "<text x=\"18\" y=\"" + std::to_string((mt + h - mb) / 2) +
           "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" "
           "transform=\"rotate(-90 18 " + std::to_string((mt + h - mb) / 2) + ")\">" + y_label +
           "</text>\n";
    for (size_t i = 0; i < series.size(); ++i) {
        const char* color = colors[i % 6];
        std::string pts;
        for (auto [x, y] : series[i].points) pts += num(sx(x)) + "," + num(sy(y)) + " ";
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        int ly = mt + 16 * static_cast<int>(i);
        svg += "<line x1=\"" + std::to_string(w - mr + 10) + "\" y1=\"" + std::to_string(ly) +
               "\" x2=\"" + std::to_string(w - mr + 34) + "\" y2=\"" + std::to_string(ly) +
               "\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
        svg += "<text x=\"" + std::to_string(w - mr + 40) + "\" y=\"" + std::to_string(ly + 4) +
               "\" font-family=\"monospace\" font-size=\"11\">" + series[i].name + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

inline void write_svg_chart(const std::string& path, const std::string& title,
                            const std::string& x_label, const std::string& y_label,
                            const std::vector<Series>& series) {
    write_text(path, svg_chart(title, x_label, y_label, series));
}

}  // namespace betanas::io
