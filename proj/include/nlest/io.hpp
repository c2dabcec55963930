#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "nlest/cz.hpp"
#include "nlest/fields.hpp"
#include "nlest/grid.hpp"
#include "nlest/kernel_weights.hpp"

namespace nlest {

// "%.17g": shortest form that round-trips every double.
std::string format_double(double v);

// Parses "key=value key=value ..." tokens (after an optional leading word).
std::map<std::string, std::string> parse_header_pairs(const std::string& line);

/**
 * Grid function CSV:
 *   # nlest-grid-function dim=.. n_cells=.. half_width=.. exterior_radius=.. h=.. exterior=..
 *   [# tag=...]            optional comment lines, ignored on read
 *   x,value  |  x,y,value
 *   one row per node of the extended box
 */
void write_grid_function(std::ostream& os, const GridFunction& u, const std::string& tag = {});
GridFunction read_grid_function(std::istream& is);
void save_grid_function(const std::string& path, const GridFunction& u, const std::string& tag = {});
GridFunction load_grid_function(const std::string& path);

/**
 * Set indicator CSV: same header word "nlest-set", then x,value (or x,y,value)
 * rows at cell centres. Cells without a row are outside the set.
 */
void write_set_indicator(std::ostream& os, const SetIndicator& s, const std::string& tag = {});
SetIndicator read_set_indicator(std::istream& is);
SetIndicator load_set_indicator(const std::string& path);

// Box-node field (operator output) as CSV: x[,y],value.
void write_scalar_field(std::ostream& os, const ScalarField& v, const std::string& column,
                        const std::string& tag = {});

// One row per cube: role,center_x[,center_y],half_side,level,density.
void write_cz_result(std::ostream& os, const CZResult& r, const GridSpec& spec,
                     const std::string& tag = {});

/**
 * Weight cache:
 *   nlest-weights version=1 dim=.. n_cells=.. half_width=.. exterior_radius=.. sigma=.. scheme=.. h=..
 *     offsets=N checksum=<hex> tail=<n(n+1)/2 entries, comma separated>
 *   k0 [k1] w_xx [w_xy w_yy]      one line per offset, in evaluation order
 * The loader rejects version or checksum mismatches.
 */
constexpr int kWeightsFormatVersion = 1;
void write_weights(std::ostream& os, const KernelWeights& w);
KernelWeights read_weights(std::istream& is);
void save_weights(const std::string& path, const KernelWeights& w);
KernelWeights load_weights(const std::string& path);

}  // namespace nlest
