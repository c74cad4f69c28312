#include "nsv/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <algorithm>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace nsv {

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian; big-endian hosts are unsupported");

namespace {

constexpr std::size_t magic_bytes = 9;

void put_u64(std::ofstream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_f64(std::ofstream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint64_t get_u64(std::ifstream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
double get_f64(std::ifstream& in) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_snapshot(const std::string& path, const PhysicalField& field, double time,
                    const char* magic) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open snapshot for writing: " + path);
    char m[magic_bytes] = {};
    std::memcpy(m, magic, std::min(std::strlen(magic), magic_bytes));
    out.write(m, magic_bytes);
    put_u64(out, std::uint64_t(field.grid.n()));
    put_f64(out, field.grid.length());
    put_f64(out, time);
    put_u64(out, 3);
    for (int c = 0; c < 3; ++c)
        out.write(reinterpret_cast<const char*>(field.comp[c].data()),
                  std::streamsize(field.comp[c].size() * sizeof(double)));
    if (!out) throw std::runtime_error("short write on snapshot: " + path);
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open snapshot: " + path);
    char m[magic_bytes + 1] = {};
    in.read(m, magic_bytes);
    const std::string magic(m);
    if (magic.rfind("NSVD1", 0) != 0)
        throw std::runtime_error("bad snapshot magic in " + path);
    const std::uint64_t n = get_u64(in);
    const double length = get_f64(in);
    const double time = get_f64(in);
    const std::uint64_t comps = get_u64(in);
    if (comps != 3) throw std::runtime_error("unexpected component count in " + path);
    PeriodicGrid grid(int(n), length);
    Snapshot snap{PhysicalField(grid), time, magic};
    for (int c = 0; c < 3; ++c)
        in.read(reinterpret_cast<char*>(snap.field.comp[c].data()),
                std::streamsize(snap.field.comp[c].size() * sizeof(double)));
    if (!in) throw std::runtime_error("short read on snapshot: " + path);
    return snap;
}

void write_energy_csv(const std::string& path, const std::vector<EnergyRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open csv for writing: " + path);
    out << "step,time,l2,vnorm,lrp1,energy,residual\n";
    for (const auto& r : rows)
        out << r.step << ',' << fmt(r.time) << ',' << fmt(r.l2) << ',' << fmt(r.vnorm) << ','
            << fmt(r.lrp1) << ',' << fmt(r.energy) << ',' << fmt(r.residual) << '\n';
}

void write_iteration_csv(const std::string& path, const std::vector<IterationRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open csv for writing: " + path);
    out << "iter,cost,grad_norm,vi_residual,step_size,line_search_evals\n";
    for (const auto& r : rows)
        out << r.iter << ',' << fmt(r.cost) << ',' << fmt(r.grad_norm) << ','
            << fmt(r.vi_residual) << ',' << fmt(r.step_size) << ',' << r.line_search_evals
            << '\n';
}

void write_check_report(const std::string& path, const std::vector<CheckResult>& checks) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open report for writing: " + path);
    for (const auto& c : checks) out << format_check_line(c) << '\n';
}

void write_remainder_csv(const std::string& path, const std::vector<RemainderRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open csv for writing: " + path);
    out << "eps,fd_central,central_remainder,taylor_remainder\n";
    for (const auto& r : rows)
        out << fmt(r.eps) << ',' << fmt(r.fd_central) << ',' << fmt(r.central_remainder) << ','
            << fmt(r.taylor_remainder) << '\n';
}

void write_optimality_report(const std::string& path, const OptimalityReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open report for writing: " + path);
    out << "status=" << report.status << '\n';
    out << "iterations=" << report.iterations << '\n';
    out << "cost=" << fmt(report.cost) << '\n';
    out << "grad_norm=" << fmt(report.grad_norm) << '\n';
    out << "vi_residual=" << fmt(report.vi_residual) << '\n';
    out << "projection_residual=" << fmt(report.projection_residual) << '\n';
    for (const auto& s : report.soc_samples)
        out << "soc_curvature_" << s.direction_id << '=' << fmt(s.curvature) << '\n';
    out << "global_q_v=" << fmt(report.global.q_v) << '\n';
    out << "global_q_h=" << fmt(report.global.q_h) << '\n';
    out << "global_threshold=" << fmt(report.global.threshold) << '\n';
    const char* verdict = report.global.verdict == GlobalVerdict::satisfied      ? "SATISFIED"
                          : report.global.verdict == GlobalVerdict::not_satisfied ? "NOT_SATISFIED"
                                                                                  : "UNKNOWN";
    out << "global_verdict=" << verdict << '\n';
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t c = line.find(',', start);
        out.push_back(line.substr(start, c - start));
        if (c == std::string::npos) break;
        start = c + 1;
    }
    return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path, const char* header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open csv: " + path);
    std::string line;
    if (!std::getline(in, line) || line != header)
        throw std::runtime_error("unexpected csv header in " + path);
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(split_csv_line(line));
    return rows;
}

}  // namespace

std::vector<EnergyRow> read_energy_csv(const std::string& path) {
    std::vector<EnergyRow> out;
    for (const auto& f : read_csv(path, "step,time,l2,vnorm,lrp1,energy,residual")) {
        if (f.size() != 7) throw std::runtime_error("malformed energy csv row in " + path);
        out.push_back({std::stoi(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3]),
                       std::stod(f[4]), std::stod(f[5]), std::stod(f[6])});
    }
    return out;
}

std::vector<IterationRow> read_iteration_csv(const std::string& path) {
    std::vector<IterationRow> out;
    for (const auto& f :
         read_csv(path, "iter,cost,grad_norm,vi_residual,step_size,line_search_evals")) {
        if (f.size() != 6) throw std::runtime_error("malformed iteration csv row in " + path);
        out.push_back({std::stoi(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3]),
                       std::stod(f[4]), std::stoi(f[5])});
    }
    return out;
}

std::vector<RemainderRow> read_remainder_csv(const std::string& path) {
    std::vector<RemainderRow> out;
    for (const auto& f : read_csv(path, "eps,fd_central,central_remainder,taylor_remainder")) {
        if (f.size() != 4) throw std::runtime_error("malformed remainder csv row in " + path);
        out.push_back({std::stod(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3])});
    }
    return out;
}

std::vector<CheckResult> read_check_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report: " + path);
    std::vector<CheckResult> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        CheckResult c;
        char name[128] = {};
        int pass = 0;
        if (std::sscanf(line.c_str(), "check=%127s measured=%lf threshold=%lf pass=%d", name,
                        &c.measured, &c.threshold, &pass) != 4)
            throw std::runtime_error("malformed check line in " + path);
        c.name = name;
        c.pass = pass != 0;
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> read_key_value_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report: " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("malformed report line in " + path);
        out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return out;
}

bool verify_manifest(const std::string& dir) {
    std::ifstream in(dir + "/manifest.txt");
    if (!in) throw std::runtime_error("cannot open manifest in " + dir);
    std::string name, hash;
    while (in >> name >> hash) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a_file_hash(dir + "/" + name)));
        if (hash != buf) return false;
    }
    return true;
}

std::uint64_t fnv1a_file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot hash missing file: " + path);
    std::uint64_t h = 1469598103934665603ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= std::uint8_t(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    return h;
}

void write_manifest(const std::string& dir, const std::vector<std::string>& filenames) {
    std::ofstream out(dir + "/manifest.txt");
    if (!out) throw std::runtime_error("cannot open manifest for writing in " + dir);
    for (const auto& f : filenames) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a_file_hash(dir + "/" + f)));
        out << f << ' ' << buf << '\n';
    }
}

}  // namespace nsv
