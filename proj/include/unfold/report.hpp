#pragma once

#include <string>

#include "unfold/poly.hpp"

namespace unfold {

/* Deterministic JSON text: insertion order preserved (ordered_json), all
 * floating point numbers printed with %.17g. */
std::string dump_deterministic(const json& j, int indent = 2);

json cplx_to_json(cplx z);
cplx cplx_from_json(const json& j);
json mat_to_json(const Mat& m);
Mat mat_from_json(const json& j);
json diag_to_json(const Vec& d);
Vec diag_from_json(const json& j);
json eps_to_json(const UnfoldedParameter& e);
UnfoldedParameter eps_from_json(const json& j);

void write_text_file(const std::string& path, const std::string& content);

/* CSV emission: header row then rows of %.17g-formatted cells. */
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

}  // namespace unfold
