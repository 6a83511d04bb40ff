#include "pfl/report_json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pfl {

std::string format_double(double value) {
    std::ostringstream out;
    out.precision(17);
    out << value;
    return out.str();
}

Json quad_json(const QuadExt& value) {
    return Json{{"exact", value.str()}, {"float", value.to_double()}};
}

Json projective_json(const ProjectiveScalar& value) {
    if (value.is_infinity()) return Json{{"exact", "inf"}, {"float", nullptr}};
    return quad_json(value.finite());
}

Json branch_json(const MoebiusBranch& v) {
    return Json{
        {"a", v.a().str()}, {"b", v.b().str()}, {"c", v.c().str()}, {"d", v.d().str()},
        {"formula", v.str()},
    };
}

MoebiusBranch branch_from_json(const Json& j) {
    return MoebiusBranch(parse_quad(j.at("a").get<std::string>()),
                         parse_quad(j.at("b").get<std::string>()),
                         parse_quad(j.at("c").get<std::string>()),
                         parse_quad(j.at("d").get<std::string>()));
}

Json map_json(const PiecewiseMoebiusMap& map) {
    Json j;
    j["partition"] = Json::array();
    for (const auto& point : map.partition) j["partition"].push_back(quad_json(point));
    j["branches"] = Json::array();
    for (std::size_t k = 0; k < map.branches.size(); ++k) {
        Json b = branch_json(map.branches[k]);
        b["label"] = k < map.labels.size() ? map.labels[k] : "";
        j["branches"].push_back(std::move(b));
    }
    j["branch_count"] = map.branches.size();
    j["type"] = type_signature_str(classify_type(map));
    return j;
}

PiecewiseMoebiusMap map_from_json(const Json& j) {
    PiecewiseMoebiusMap map;
    for (const auto& point : j.at("partition"))
        map.partition.push_back(parse_quad(point.at("exact").get<std::string>()));
    for (const auto& b : j.at("branches")) {
        map.branches.push_back(branch_from_json(b));
        map.labels.push_back(b.value("label", ""));
    }
    return map;
}

Json validation_json(const ValidationReport& report) {
    Json j;
    j["valid"] = report.valid;
    if (!report.structure_error.empty()) j["structure_error"] = report.structure_error;
    j["branches"] = Json::array();
    for (const auto& check : report.checks) {
        Json c{{"index", check.index},
               {"label", check.label},
               {"endpoints_ok", check.endpoints_ok},
               {"pole_free", check.pole_free}};
        if (!check.message.empty()) c["message"] = check.message;
        j["branches"].push_back(std::move(c));
    }
    return j;
}

Json residual_json(const ResidualReport& report, bool include_entries) {
    Json j;
    j["max_residual"] = report.max_residual;
    j["max_bound"] = report.max_bound;
    j["exact"] = report.exact;
    j["exact_zero"] = report.exact_zero;
    j["evaluated"] = report.evaluated;
    j["skipped"] = report.skipped;
    if (include_entries) {
        j["entries"] = Json::array();
        for (const auto& entry : report.entries) {
            Json e{{"x", quad_json(entry.x)}};
            if (entry.skipped) {
                e["skipped"] = true;
                e["reason"] = entry.reason;
            } else {
                e["residual"] = entry.residual;
                e["bound"] = entry.bound;
            }
            j["entries"].push_back(std::move(e));
        }
    }
    return j;
}

Json density_json(const Density& density) {
    Json j;
    j["kind"] = density.closed_form() ? "closed_form" : "series";
    j["formula"] = density.str();
    if (!density.closed_form()) {
        j["stride"] = density.as_series().stride();
        j["base"] = density.as_series().base().str();
        j["jump_branch"] = density.as_series().jump().str();
    }
    return j;
}

Json classification_json(const ClassificationReport& report) {
    Json j;
    j["family"] = family_name(report.params.family);
    j["parameters"] = Json{{"lambda", rational_str(report.params.lambda)},
                           {"mu", rational_str(report.params.mu)},
                           {"nu", rational_str(report.params.nu)}};
    j["type"] = type_signature_str(report.type);
    j["fixed_points"] = Json::object();
    j["fixed_points"]["xi"] = projective_json(report.fixed_points.xi);
    j["fixed_points"]["eta_candidates"] = Json::array();
    for (const auto& eta : report.fixed_points.eta_candidates)
        j["fixed_points"]["eta_candidates"].push_back(quad_json(eta));
    if (report.fixed_points.theta)
        j["fixed_points"]["theta"] = quad_json(*report.fixed_points.theta);
    j["conditions"] = Json::array();
    for (const auto& c : report.conditions)
        j["conditions"].push_back(
            Json{{"name", c.name}, {"holds", c.holds}, {"lhs", c.lhs}, {"rhs", c.rhs}});
    j["satisfied_relations"] = report.satisfied_relations;
    j["outcome"] = outcome_name(report.outcome);
    j["natural_dual_degenerate"] = report.natural_dual_degenerate;
    j["exceptional_point_degenerate"] = report.exceptional_point_degenerate;
    j["one_step_extension_flag"] = report.one_step_extension_flag;
    if (report.xi_point) j["xi_point"] = projective_json(*report.xi_point);
    if (report.dual_interval) {
        j["dual_interval"] = Json::array(
            {quad_json(report.dual_interval->first), quad_json(report.dual_interval->second)});
    }
    if (report.psi) {
        j["psi"] = Json{{"formula", report.psi->str()}, {"degenerate", report.psi->degenerate}};
        if (report.psi->constant) j["psi"]["constant"] = quad_json(*report.psi->constant);
    }
    if (report.density) j["density"] = density_json(*report.density);
    if (report.certificate) j["certificate"] = residual_json(*report.certificate);
    return j;
}

Json extension_json(const ExtensionResult& result) {
    Json j;
    j["steps"] = result.steps;
    j["kept_label"] = result.base_label_kept;
    j["jumped_label"] = result.label_jumped;
    j["branch_count"] = result.map.branches.size();
    j["map"] = map_json(result.map);
    j["density"] = density_json(result.density);
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw Error(Errc::config_error, "cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (k) out << ",";
        out << header[k];
    }
    out << "\n";
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw Error(Errc::config_error, "csv row arity mismatch");
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out << ",";
            out << row[k];
        }
        out << "\n";
    }
    write_text_file(path, out.str());
}

} // namespace pfl
