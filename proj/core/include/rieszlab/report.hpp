#ifndef RIESZLAB_REPORT_HPP
#define RIESZLAB_REPORT_HPP

#include <map>
#include <string>

namespace rieszlab {

/// Paired (measured quantity, bound, empirical constant) record emitted by
/// every verifier. `pass` reflects the check's own direction.
struct EstimateReport {
    std::string name;
    double measured_lhs = 0.0;
    double bound_rhs = 0.0;
    double empirical_constant = 0.0;
    bool pass = false;
    std::map<std::string, double> metadata;
    std::string note;
};

} // namespace rieszlab

#endif
