#pragma once

#include "vagsim/fluid/fluid.hpp"
#include "vagsim/mesh/connectivity.hpp"
#include "vagsim/mesh/mesh.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace vagsim {

/// Named per-entity scalar fields, values[k][i] for field k and entity i.
struct FieldSet {
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;
};

/// P, T, saturations, molar fractions and phase densities of the given dofs.
/// Entries of absent phases are written as zero.
FieldSet state_fields(const FluidModel& model, const std::vector<CoatsState>& x, const std::vector<int>& dofs);

/// VTK XML unstructured grid of the listed cells as polyhedra.
void write_cells_vtu(const std::filesystem::path& path, const Mesh& mesh, const std::vector<int>& cells,
                     const FieldSet& fields);

/// VTK XML unstructured grid of the listed fracture faces as polygons.
void write_fracture_vtu(const std::filesystem::path& path, const Mesh& mesh, const std::vector<int>& fracture_faces,
                        const FieldSet& fields);

/// Parallel index over per-rank pieces (file names relative to the index).
void write_pvtu(const std::filesystem::path& path, const std::vector<std::string>& pieces,
                const std::vector<std::string>& field_names);

struct PvdEntry {
    double time;
    std::string file;
};
void write_pvd(const std::filesystem::path& path, const std::vector<PvdEntry>& entries);

} // namespace vagsim
