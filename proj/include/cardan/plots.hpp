#pragma once

#include <string>
#include <vector>

#include "cardan/csv.hpp"

namespace cardan {

struct PlotFile {
  std::string name;  // file stem, e.g. "ber_vs_budget"
  std::string svg;
};

/// Renders SVG line plots from any CSV this project writes. The schema is
/// recognised by its columns:
///   optimization trace  -> loss_trace (total and best_total per iteration)
///   eval-ber            -> ber_vs_budget (one soft-mode line per si)
///   sweep-grille        -> ber_vs_grille_size, message_loss_vs_grille_size
///   zero-message        -> zero_message_convergence
/// Throws FormatError for an empty table or an unknown schema.
std::vector<PlotFile> render_plots(const CsvTable& table);

}  // namespace cardan
