// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

namespace pstab {

/// Frozen constants measured by `pstab-calibrate`; see data/calibration.txt.
///
/// File format: one `key = value` per line, `#` starts a comment.
struct Calibration {
    double c_resolvent = 0.0;  ///< bound on max_mu of nu^{1/2}|k|^{1/2} ||(M - i mu)^{-1}||
    double c_hardy = 0.0;      ///< Hardy-type ratio bound on the critical layer
    double c_p = 0.0;          ///< single constant for the four critical-layer integral bounds
    double c_u = 0.0;          ///< ||u_nonzero||_inf <= c_u ||omega_nonzero||_2

    static Calibration load(const std::string& path);
    static Calibration from_map(const std::map<std::string, std::string>& kv);
    void save(const std::string& path, const std::string& header_comment = {}) const;
};

/// Parse `key = value` lines. Blank lines and `#` comments are skipped;
/// malformed lines throw std::invalid_argument naming the line number.
std::map<std::string, std::string> parse_key_values(const std::string& text);

}  // namespace pstab
