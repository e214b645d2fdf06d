#pragma once

#include <filesystem>

#include "plasmasym/state.hpp"

namespace plasmasym::fields {

enum class Format { csv, vtk };

/// CSV: header `x,y,z,B1,B2,B3,p_perp,p_par,tau,psi`, one node per row in
/// flat-index order, 17 significant digits. A sidecar `<path>.meta.json`
/// carries provenance and the run-length-encoded active mask.
/// VTK: legacy ASCII STRUCTURED_POINTS with VECTORS B and one SCALARS block
/// per pressure/label field.
void export_state(const CGLState& state, const std::filesystem::path& path, Format format);

/// Reads a CSV written by export_state (sidecar optional). The grid is
/// recovered from the node coordinates.
CGLState read_state_csv(const std::filesystem::path& path);

/// `%.17g` formatting.
std::string format_double(double v);

}  // namespace plasmasym::fields
