#pragma once

#include "abreu/grid.hpp"
#include "abreu/oracle.hpp"
#include "abreu/outer.hpp"

#include <string>
#include <vector>

namespace abreu {

/// 17-significant-digit decimal rendering (%.17g), locale-independent.
std::string fmt17(double v);

/// Field dump: header `x,y,value,node_class`, row-major nodes.
void write_field_csv(const std::string& path, const ScalarField& f, const DomainMask& mask);

struct FieldDump {
    ScalarField field;
    std::vector<int> node_class;
    GridSpec grid;
};
FieldDump read_field_csv(const std::string& path);

/// Iteration log: t,k,defect,ma_residual,lma_residual,min_w,max_w,min_det,max_det.
void write_report_csv(const std::string& path, const std::vector<IterRecord>& history);

struct ContinuationRow {
    double eps;
    double err_vs_oracle; // NaN when no oracle run participated
    double err_vs_prev;   // NaN for the first entry
    double eps_bnd_unu2, rho_l2_omega0, inveps_l2_outside;
    int status; // 0 converged, 1 not converged, 2 degenerate
};
/// eps,err_vs_oracle,err_vs_prev,eps_bnd_unu2,rho_l2_omega0,inveps_l2_outside,status
void write_continuation_csv(const std::string& path, const std::vector<ContinuationRow>& rows);

/// iter,objective,pg_norm,max_violation
void write_oracle_csv(const std::string& path, const std::vector<OracleIterRow>& rows);

} // namespace abreu
