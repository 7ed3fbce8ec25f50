#pragma once
// JSON and CSV report emission. Floats are written with 17 significant digits
// so that identical runs give byte-identical files.

#include "folhe/field.hpp"
#include "folhe/he_solver.hpp"
#include "folhe/stability.hpp"

#include "json.hpp"

#include <map>
#include <string>
#include <vector>

namespace folhe {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSoftwareVersion = "1.0.0";
inline constexpr const char* kReportSchema = "folhe-report/1";

// Deterministic serialization; non-finite numbers become null.
std::string dump_json(const Json& j, int indent = 2);
std::string format_double(double v);

// Skeleton {schema, command, version, config}; the caller adds results and
// then finish_report() appends the wall_clock block last. Everything except
// wall_clock is deterministic.
Json make_report(const std::string& command,
                 const std::map<std::string, std::map<std::string, std::string>>& config);
void finish_report(Json& report, double seconds, const Json& runs = Json::object());

Json history_json(const std::vector<StepRecord>& history);
std::string history_csv(const std::vector<StepRecord>& history);
// Nonzero modes as {k: [...], coeff: [[re, im], ...]} with coefficients in
// (comp, i, j) order.
Json field_json(const BasicField& f);
Json destabilizer_json(const DestabilizerReport& d);
Json filtration_json(const Filtration& f);
Json candidate_json(const SubbundleCandidate& c);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace folhe
