#include "abreu/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace abreu {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_field_csv(const std::string& path, const ScalarField& f, const DomainMask& mask) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "x,y,value,node_class\n";
    const GridSpec& g = f.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out << fmt17(g.x(i)) << ',' << fmt17(g.y(j)) << ',' << fmt17(f(i, j)) << ','
                << static_cast<int>(mask.cls(i, j)) << '\n';
}

FieldDump read_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,y,value,node_class", 0) != 0)
        throw std::runtime_error(path + ": missing field-dump header");

    std::vector<double> xs, ys, vs;
    std::vector<int> cls;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        double row[3];
        for (int t = 0; t < 3; ++t) {
            if (!std::getline(ss, tok, ',')) throw std::runtime_error(path + ": short row");
            row[t] = std::stod(tok);
        }
        if (!std::getline(ss, tok, ',')) throw std::runtime_error(path + ": short row");
        xs.push_back(row[0]);
        ys.push_back(row[1]);
        vs.push_back(row[2]);
        cls.push_back(std::stoi(tok));
    }

    // recover the grid: row-major, x fastest
    int nx = 0;
    while (nx < static_cast<int>(xs.size()) && (nx == 0 || xs[nx] > xs[nx - 1])) ++nx;
    if (nx < 5 || xs.size() % nx != 0)
        throw std::runtime_error(path + ": not a row-major rectangular dump");
    const int ny = static_cast<int>(xs.size()) / nx;
    FieldDump d{ScalarField(), cls, GridSpec(nx, ny, xs.front(), xs[nx - 1], ys.front(), ys.back())};
    d.field = ScalarField(d.grid);
    for (std::size_t k = 0; k < vs.size(); ++k) d.field.at(static_cast<int>(k)) = vs[k];
    return d;
}

void write_report_csv(const std::string& path, const std::vector<IterRecord>& history) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "t,k,defect,ma_residual,lma_residual,min_w,max_w,min_det,max_det\n";
    for (const auto& r : history)
        out << fmt17(r.t) << ',' << r.k << ',' << fmt17(r.defect) << ',' << fmt17(r.ma_residual)
            << ',' << fmt17(r.lma_residual) << ',' << fmt17(r.min_w) << ',' << fmt17(r.max_w)
            << ',' << fmt17(r.min_det) << ',' << fmt17(r.max_det) << '\n';
}

void write_continuation_csv(const std::string& path, const std::vector<ContinuationRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "eps,err_vs_oracle,err_vs_prev,eps_bnd_unu2,rho_l2_omega0,inveps_l2_outside,status\n";
    for (const auto& r : rows)
        out << fmt17(r.eps) << ',' << fmt17(r.err_vs_oracle) << ',' << fmt17(r.err_vs_prev) << ','
            << fmt17(r.eps_bnd_unu2) << ',' << fmt17(r.rho_l2_omega0) << ','
            << fmt17(r.inveps_l2_outside) << ',' << r.status << '\n';
}

void write_oracle_csv(const std::string& path, const std::vector<OracleIterRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "iter,objective,pg_norm,max_violation\n";
    for (const auto& r : rows)
        out << r.iter << ',' << fmt17(r.objective) << ',' << fmt17(r.pg_norm) << ','
            << fmt17(r.max_violation) << '\n';
}

} // namespace abreu
