#include "vagsim/sim/output.hpp"

#include "vagsim/common/errors.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

namespace vagsim {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out.precision(17);
    return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out) throw Error("I/O error while writing " + path.string());
}

template <class Range>
void write_array(std::ostream& os, const char* type, const std::string& name, const Range& r, int components = 1)
{
    os << "<DataArray type=\"" << type << "\" Name=\"" << name << "\"";
    if (components > 1) os << " NumberOfComponents=\"" << components << "\"";
    os << " format=\"ascii\">\n";
    for (const auto& v : r)
        os << v << ' ';
    os << "\n</DataArray>\n";
}

/// Local numbering of the mesh nodes used by a piece.
struct PointMap {
    std::unordered_map<int, int> local;
    std::vector<int> global;

    int operator()(int n)
    {
        auto [it, inserted] = local.try_emplace(n, static_cast<int>(global.size()));
        if (inserted) global.push_back(n);
        return it->second;
    }
};

void write_piece(std::ostream& os, const Mesh& mesh, const PointMap& pts, std::size_t num_cells)
{
    os << "<VTKFile type=\"UnstructuredGrid\" version=\"1.0\" byte_order=\"LittleEndian\" header_type=\"UInt64\">\n"
       << "<UnstructuredGrid>\n<Piece NumberOfPoints=\"" << pts.global.size() << "\" NumberOfCells=\"" << num_cells
       << "\">\n<Points>\n";
    std::vector<double> xyz;
    xyz.reserve(3 * pts.global.size());
    for (int n : pts.global)
        for (int a = 0; a < 3; ++a)
            xyz.push_back(mesh.nodes[n][a]);
    write_array(os, "Float64", "Points", xyz, 3);
    os << "</Points>\n";
}

void write_cell_data(std::ostream& os, const FieldSet& f)
{
    os << "<CellData>\n";
    for (std::size_t k = 0; k < f.names.size(); ++k)
        write_array(os, "Float64", f.names[k], f.values[k]);
    os << "</CellData>\n</Piece>\n</UnstructuredGrid>\n</VTKFile>\n";
}

} // namespace

FieldSet state_fields(const FluidModel& model, const std::vector<CoatsState>& x, const std::vector<int>& dofs)
{
    FieldSet f;
    auto add = [&](std::string name) {
        f.names.push_back(std::move(name));
        f.values.emplace_back();
        f.values.back().reserve(dofs.size());
        return f.values.size() - 1;
    };
    const std::size_t ip = add("P");
    const std::size_t it = add("T");
    std::size_t is[kMaxPhases], ir[kMaxPhases], ic[kMaxPhases][kMaxComponents];
    for (int a = 0; a < model.num_phases(); ++a) {
        is[a] = add(std::string("S_") + model.phase_name(a));
        ir[a] = add(std::string("rho_") + model.phase_name(a));
        for (int i = 0; i < model.num_components(); ++i)
            if (model.contains(a, i))
                ic[a][i] = add(std::string("C_") + model.component_name(i) + "_" + model.phase_name(a));
    }
    for (int v : dofs) {
        const CoatsState& s = x[v];
        f.values[ip].push_back(s.p);
        f.values[it].push_back(s.t);
        for (int a = 0; a < model.num_phases(); ++a) {
            const bool present = s.present(a);
            f.values[is[a]].push_back(present ? s.s[a] : 0.0);
            f.values[ir[a]].push_back(present ? model.rho(a, s.p, s.t, s.c[a]) : 0.0);
            for (int i = 0; i < model.num_components(); ++i)
                if (model.contains(a, i)) f.values[ic[a][i]].push_back(present ? s.c[a][i] : 0.0);
        }
    }
    return f;
}

void write_cells_vtu(const std::filesystem::path& path, const Mesh& mesh, const std::vector<int>& cells,
                     const FieldSet& fields)
{
    PointMap pts;
    std::vector<long> conn, offsets, faces, face_offsets;
    std::vector<int> types(cells.size(), 42); // VTK_POLYHEDRON
    for (int k : cells) {
        std::vector<int> used;
        faces.push_back(static_cast<long>(mesh.cells[k].faces.size()));
        for (int f : mesh.cells[k].faces) {
            const auto& nodes = mesh.faces[f].nodes;
            faces.push_back(static_cast<long>(nodes.size()));
            for (int n : nodes) {
                const int l = pts(n);
                faces.push_back(l);
                if (std::find(used.begin(), used.end(), l) == used.end()) used.push_back(l);
            }
        }
        conn.insert(conn.end(), used.begin(), used.end());
        offsets.push_back(static_cast<long>(conn.size()));
        face_offsets.push_back(static_cast<long>(faces.size()));
    }
    auto out = open_for_write(path);
    write_piece(out, mesh, pts, cells.size());
    out << "<Cells>\n";
    write_array(out, "Int64", "connectivity", conn);
    write_array(out, "Int64", "offsets", offsets);
    write_array(out, "UInt8", "types", types);
    write_array(out, "Int64", "faces", faces);
    write_array(out, "Int64", "faceoffsets", face_offsets);
    out << "</Cells>\n";
    write_cell_data(out, fields);
    check_written(out, path);
}

void write_fracture_vtu(const std::filesystem::path& path, const Mesh& mesh, const std::vector<int>& fracture_faces,
                        const FieldSet& fields)
{
    PointMap pts;
    std::vector<long> conn, offsets;
    std::vector<int> types(fracture_faces.size(), 7); // VTK_POLYGON
    for (int f : fracture_faces) {
        for (int n : mesh.faces[mesh.fracture_faces[f].face].nodes)
            conn.push_back(pts(n));
        offsets.push_back(static_cast<long>(conn.size()));
    }
    auto out = open_for_write(path);
    write_piece(out, mesh, pts, fracture_faces.size());
    out << "<Cells>\n";
    write_array(out, "Int64", "connectivity", conn);
    write_array(out, "Int64", "offsets", offsets);
    write_array(out, "UInt8", "types", types);
    out << "</Cells>\n";
    write_cell_data(out, fields);
    check_written(out, path);
}

void write_pvtu(const std::filesystem::path& path, const std::vector<std::string>& pieces,
                const std::vector<std::string>& field_names)
{
    auto out = open_for_write(path);
    out << "<VTKFile type=\"PUnstructuredGrid\" version=\"1.0\" byte_order=\"LittleEndian\" header_type=\"UInt64\">\n"
        << "<PUnstructuredGrid GhostLevel=\"0\">\n<PPoints>\n"
        << "<PDataArray type=\"Float64\" NumberOfComponents=\"3\"/>\n</PPoints>\n<PCellData>\n";
    for (const auto& n : field_names)
        out << "<PDataArray type=\"Float64\" Name=\"" << n << "\"/>\n";
    out << "</PCellData>\n";
    for (const auto& p : pieces)
        out << "<Piece Source=\"" << p << "\"/>\n";
    out << "</PUnstructuredGrid>\n</VTKFile>\n";
    check_written(out, path);
}

void write_pvd(const std::filesystem::path& path, const std::vector<PvdEntry>& entries)
{
    auto out = open_for_write(path);
    out << "<VTKFile type=\"Collection\" version=\"1.0\">\n<Collection>\n";
    for (const auto& e : entries)
        out << "<DataSet timestep=\"" << e.time << "\" file=\"" << e.file << "\"/>\n";
    out << "</Collection>\n</VTKFile>\n";
    check_written(out, path);
}

} // namespace vagsim
