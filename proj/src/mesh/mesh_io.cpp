#include "vagsim/common/errors.hpp"
#include "vagsim/mesh/mesh.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace vagsim {

namespace {

std::string fmt_double(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class LineReader {
public:
    explicit LineReader(std::istream& is) : is_(is) {}

    /// Next non-empty line split into tokens, comments stripped; false at EOF.
    bool next(std::vector<std::string>& tokens)
    {
        std::string line;
        while (std::getline(is_, line)) {
            ++line_;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            tokens.clear();
            std::istringstream ss(line);
            for (std::string t; ss >> t;)
                tokens.push_back(std::move(t));
            if (!tokens.empty()) return true;
        }
        return false;
    }
    int line() const { return line_; }

private:
    std::istream& is_;
    int line_ = 0;
};

int to_int(const std::string& s, int line)
{
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError("expected an integer, got '" + s + "'", line);
    return v;
}

double to_double(const std::string& s, int line)
{
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError("expected a number, got '" + s + "'", line);
    return v;
}

int section_size(const std::vector<std::string>& tok, const char* name, int line)
{
    if (tok.size() != 2 || tok[0] != name)
        throw ParseError(std::string("expected section header '") + name + " <count>'", line);
    const int n = to_int(tok[1], line);
    if (n < 0) throw ParseError("negative section size", line);
    return n;
}

void expect_id(const std::string& tok, int expected, int line)
{
    if (to_int(tok, line) != expected)
        throw ParseError("entries must be numbered consecutively from 0; expected " + std::to_string(expected), line);
}

} // namespace

void write_mesh(const Mesh& mesh, std::ostream& os)
{
    os << "# vagsim polyhedral mesh\n";
    os << "NODES " << mesh.num_nodes() << '\n';
    for (int s = 0; s < mesh.num_nodes(); ++s) {
        const Vec3& x = mesh.nodes[s];
        os << s << ' ' << fmt_double(x[0]) << ' ' << fmt_double(x[1]) << ' ' << fmt_double(x[2]) << '\n';
    }
    os << "FACES " << mesh.num_faces() << '\n';
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const Face& face = mesh.faces[f];
        os << f << ' ' << face.nodes.size();
        for (int s : face.nodes)
            os << ' ' << s;
        for (double b : face.beta)
            os << ' ' << fmt_double(b);
        os << '\n';
    }
    os << "CELLS " << mesh.num_cells() << '\n';
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Cell& cell = mesh.cells[c];
        os << c << ' ' << cell.faces.size();
        for (int f : cell.faces)
            os << ' ' << f;
        for (int d = 0; d < 3; ++d)
            os << ' ' << fmt_double(cell.center[d]);
        os << '\n';
    }
    os << "FRACTURE_FACES " << mesh.num_fracture_faces() << '\n';
    for (const FractureFace& ff : mesh.fracture_faces)
        os << ff.face << ' ' << ff.fracture << ' ' << fmt_double(ff.width) << '\n';

    std::vector<std::string> tags;
    for (int s = 0; s < static_cast<int>(mesh.node_tags.size()); ++s)
        if (mesh.node_tags[s] != BoundaryTag::none)
            tags.push_back("node " + std::to_string(s) + ' ' + to_string(mesh.node_tags[s]));
    for (int f = 0; f < static_cast<int>(mesh.face_tags.size()); ++f)
        if (mesh.face_tags[f] != BoundaryTag::none)
            tags.push_back("face " + std::to_string(f) + ' ' + to_string(mesh.face_tags[f]));
    os << "BOUNDARY " << tags.size() << '\n';
    for (const auto& t : tags)
        os << t << '\n';
}

void write_mesh(const Mesh& mesh, const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw MeshError("cannot open '" + path + "' for writing");
    write_mesh(mesh, os);
    if (!os) throw MeshError("write to '" + path + "' failed");
}

Mesh read_mesh(std::istream& is)
{
    LineReader in(is);
    std::vector<std::string> tok;
    Mesh mesh;

    auto require_line = [&](const char* what) {
        if (!in.next(tok)) throw ParseError(std::string("unexpected end of file while reading ") + what, in.line());
    };

    require_line("NODES");
    const int nn = section_size(tok, "NODES", in.line());
    mesh.nodes.resize(nn);
    for (int s = 0; s < nn; ++s) {
        require_line("nodes");
        if (tok.size() != 4) throw ParseError("node entry needs 'id x y z'", in.line());
        expect_id(tok[0], s, in.line());
        for (int d = 0; d < 3; ++d)
            mesh.nodes[s][d] = to_double(tok[1 + d], in.line());
    }

    require_line("FACES");
    const int nf = section_size(tok, "FACES", in.line());
    mesh.faces.resize(nf);
    for (int f = 0; f < nf; ++f) {
        require_line("faces");
        if (tok.size() < 2) throw ParseError("face entry needs 'id k nodes...'", in.line());
        expect_id(tok[0], f, in.line());
        const int k = to_int(tok[1], in.line());
        if (k < 3) throw ParseError("face needs at least 3 nodes", in.line());
        const std::size_t nk = static_cast<std::size_t>(k);
        if (tok.size() != 2 + nk && tok.size() != 2 + 2 * nk)
            throw ParseError("face entry must list k nodes, optionally followed by k weights", in.line());
        Face& face = mesh.faces[f];
        for (std::size_t i = 0; i < nk; ++i)
            face.nodes.push_back(to_int(tok[2 + i], in.line()));
        if (tok.size() == 2 + 2 * nk) {
            for (std::size_t i = 0; i < nk; ++i)
                face.beta.push_back(to_double(tok[2 + nk + i], in.line()));
        } else {
            face.beta.assign(nk, 1.0 / k);
        }
    }

    require_line("CELLS");
    const int nc = section_size(tok, "CELLS", in.line());
    mesh.cells.resize(nc);
    for (int c = 0; c < nc; ++c) {
        require_line("cells");
        if (tok.size() < 2) throw ParseError("cell entry needs 'id k faces... cx cy cz'", in.line());
        expect_id(tok[0], c, in.line());
        const int k = to_int(tok[1], in.line());
        if (k < 1 || tok.size() != 2 + static_cast<std::size_t>(k) + 3)
            throw ParseError("cell entry must list k faces and a center", in.line());
        for (int i = 0; i < k; ++i)
            mesh.cells[c].faces.push_back(to_int(tok[2 + i], in.line()));
        for (int d = 0; d < 3; ++d)
            mesh.cells[c].center[d] = to_double(tok[2 + k + d], in.line());
    }

    mesh.node_tags.assign(nn, BoundaryTag::none);
    mesh.face_tags.assign(nf, BoundaryTag::none);

    while (in.next(tok)) {
        if (tok.size() == 2 && tok[0] == "FRACTURE_FACES") {
            const int n = section_size(tok, "FRACTURE_FACES", in.line());
            for (int i = 0; i < n; ++i) {
                require_line("fracture faces");
                if (tok.size() != 3) throw ParseError("fracture entry needs 'face fracture width'", in.line());
                mesh.fracture_faces.push_back(
                    {to_int(tok[0], in.line()), to_int(tok[1], in.line()), to_double(tok[2], in.line())});
            }
        } else if (tok.size() == 2 && tok[0] == "BOUNDARY") {
            const int n = section_size(tok, "BOUNDARY", in.line());
            for (int i = 0; i < n; ++i) {
                require_line("boundary tags");
                if (tok.size() != 3 || (tok[0] != "node" && tok[0] != "face"))
                    throw ParseError("boundary entry needs 'node|face id tag'", in.line());
                const int id = to_int(tok[1], in.line());
                BoundaryTag tag;
                try {
                    tag = boundary_tag_from_string(tok[2]);
                } catch (const MeshError& e) {
                    throw ParseError(e.what(), in.line());
                }
                auto& tags = tok[0] == "node" ? mesh.node_tags : mesh.face_tags;
                if (id < 0 || id >= static_cast<int>(tags.size()))
                    throw ParseError(tok[0] + " id out of range", in.line());
                tags[id] = tag;
            }
        } else {
            throw ParseError("unknown section '" + tok[0] + "'", in.line());
        }
    }

    validate(mesh);
    return mesh;
}

Mesh load_mesh(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw MeshError("cannot open mesh file '" + path + "'");
    return read_mesh(is);
}

} // namespace vagsim
