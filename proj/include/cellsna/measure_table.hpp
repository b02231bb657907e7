#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cellsna/core.hpp"
#include "cellsna/csv.hpp"

namespace cellsna {

// Fixed measure order; every table column, feature block and CSV header
// follows it.
inline constexpr std::array<const char*, 7> kMeasureNames = {
    "degree", "clustering", "closeness", "degree_centrality", "betweenness", "eigenvector", "katz"};

inline constexpr std::size_t kMeasureCount = kMeasureNames.size();

// Per-source-graph metadata. Aggregated tables carry one entry per patch;
// n_nodes records each source's segment length inside the value arrays.
struct MeasureMeta {
    std::string source_id;
    std::uint64_t n_nodes = 0;
    double katz_alpha = 0.0;
    double katz_beta = 0.0;
    double evc_eigenvalue = 0.0;
    std::vector<std::string> warnings;
};

// Per-node values of the seven social-network measures of one graph (or of a
// patch concatenation). Arrays are index-aligned with graph node ids.
struct MeasureTable {
    std::vector<double> degree;
    std::vector<double> clustering;
    std::vector<double> closeness;
    std::vector<double> degree_centrality;
    std::vector<double> betweenness;
    std::vector<double> eigenvector;
    std::vector<double> katz;
    std::vector<MeasureMeta> meta;

    std::size_t n_nodes() const { return degree.size(); }

    const std::vector<double>& column(std::size_t measure_index) const {
        switch (measure_index) {
            case 0: return degree;
            case 1: return clustering;
            case 2: return closeness;
            case 3: return degree_centrality;
            case 4: return betweenness;
            case 5: return eigenvector;
            case 6: return katz;
            default: fail("range", "measure index out of range");
        }
    }

    std::vector<double>& column(std::size_t measure_index) {
        return const_cast<std::vector<double>&>(
            static_cast<const MeasureTable&>(*this).column(measure_index));
    }

    // Invariant check: equal lengths, finite values, [0,1] ranges for
    // clustering and degree centrality, unit L2 norm for eigenvector/katz.
    // All-zero eigenvector/katz columns are tolerated when a warning was
    // recorded (edgeless-graph fallback).
    void validate() const {
        const std::size_t n = n_nodes();
        for (std::size_t m = 0; m < kMeasureCount; ++m) {
            const auto& col = column(m);
            if (col.size() != n) fail("measure_table", "column length mismatch");
            for (const double v : col) {
                if (!std::isfinite(v)) fail("measure_table", std::string(kMeasureNames[m]) + " has a non-finite value");
            }
        }
        for (const double v : clustering) {
            if (v < 0.0 || v > 1.0) fail("measure_table", "clustering value outside [0,1]");
        }
        for (const double v : degree_centrality) {
            if (v < 0.0 || v > 1.0) fail("measure_table", "degree centrality outside [0,1]");
        }
        // Unit norm holds per source segment: concatenated tables hold one
        // unit (or zeroed) sub-vector per source patch.
        std::size_t covered = 0;
        for (const MeasureMeta& m : meta) covered += m.n_nodes;
        if (n >= 1 && covered == n && !meta.empty()) {
            std::size_t begin = 0;
            for (const MeasureMeta& m : meta) {
                check_unit_or_zero(eigenvector, begin, begin + m.n_nodes, "eigenvector");
                check_unit_or_zero(katz, begin, begin + m.n_nodes, "katz");
                begin += m.n_nodes;
            }
        }
    }

    nlohmann::json meta_json() const {
        nlohmann::json sources = nlohmann::json::array();
        for (const MeasureMeta& m : meta) {
            sources.push_back({{"source_id", m.source_id},
                               {"n_nodes", m.n_nodes},
                               {"katz_alpha", m.katz_alpha},
                               {"katz_beta", m.katz_beta},
                               {"evc_eigenvalue", m.evc_eigenvalue},
                               {"warnings", m.warnings}});
        }
        return sources;
    }

private:
    static void check_unit_or_zero(const std::vector<double>& col, std::size_t begin,
                                   std::size_t end, const char* name) {
        double norm2 = 0.0;
        for (std::size_t i = begin; i < end; ++i) norm2 += col[i] * col[i];
        const bool unit = std::abs(std::sqrt(norm2) - 1.0) <= 1e-9;
        const bool zero = norm2 == 0.0;
        if (!unit && !zero) fail("measure_table", std::string(name) + " segment is neither unit-norm nor zero");
    }
};

// CSV with columns node_id,<the seven measures>; metadata and the config echo
// live in a JSON sidecar next to the table.
inline void save_measure_table(const MeasureTable& table, const std::string& csv_path,
                               const nlohmann::json& config_echo) {
    CsvWriter out(csv_path);
    std::vector<std::string> header = {"node_id"};
    for (const char* name : kMeasureNames) header.emplace_back(name);
    out.write_row(header);
    for (std::size_t i = 0; i < table.n_nodes(); ++i) {
        std::vector<std::string> row = {format_u64(i)};
        for (std::size_t m = 0; m < kMeasureCount; ++m) row.push_back(format_double(table.column(m)[i]));
        out.write_row(row);
    }
    out.close();
    nlohmann::json sidecar{{"format", "cellsna.measures.v1"},
                           {"sources", table.meta_json()},
                           {"config", config_echo}};
    write_text_file(csv_path + ".meta.json", sidecar.dump(1) + "\n");
}

inline MeasureTable load_measure_table(const std::string& csv_path) {
    const auto rows = read_csv(csv_path);
    if (rows.empty() || rows[0].size() != 1 + kMeasureCount || rows[0][0] != "node_id") {
        fail("parse", "bad measure table header in " + csv_path);
    }
    for (std::size_t m = 0; m < kMeasureCount; ++m) {
        if (rows[0][m + 1] != kMeasureNames[m]) fail("parse", "bad measure table header in " + csv_path);
    }
    MeasureTable table;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 1 + kMeasureCount) fail("parse", "short row in " + csv_path);
        if (parse_u64(rows[r][0], csv_path) != r - 1) fail("parse", "node ids must be dense in " + csv_path);
        for (std::size_t m = 0; m < kMeasureCount; ++m) {
            table.column(m).push_back(parse_double(rows[r][m + 1], csv_path));
        }
    }
    const std::string sidecar_path = csv_path + ".meta.json";
    const nlohmann::json sidecar = nlohmann::json::parse(read_text_file(sidecar_path));
    for (const auto& s : sidecar.at("sources")) {
        MeasureMeta m;
        m.source_id = s.at("source_id").get<std::string>();
        m.n_nodes = s.at("n_nodes").get<std::uint64_t>();
        m.katz_alpha = s.at("katz_alpha").get<double>();
        m.katz_beta = s.at("katz_beta").get<double>();
        m.evc_eigenvalue = s.at("evc_eigenvalue").get<double>();
        m.warnings = s.at("warnings").get<std::vector<std::string>>();
        table.meta.push_back(std::move(m));
    }
    return table;
}

}  // namespace cellsna
