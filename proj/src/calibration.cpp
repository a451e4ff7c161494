// SPDX-License-Identifier: Apache-2.0
#include "pstab/calibration.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pstab {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double require(const std::map<std::string, std::string>& kv, const std::string& key)
{
    auto it = kv.find(key);
    if (it == kv.end())
        throw std::invalid_argument("calibration: missing key '" + key + "'");
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size() || !(v > 0.0))
        throw std::invalid_argument("calibration: bad value for '" + key + "'");
    return v;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text)
{
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        if (key.empty())
            throw std::invalid_argument("line " + std::to_string(lineno) + ": empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

Calibration Calibration::from_map(const std::map<std::string, std::string>& kv)
{
    Calibration c;
    c.c_resolvent = require(kv, "C_resolvent");
    c.c_hardy = require(kv, "C_hardy");
    c.c_p = require(kv, "C_P");
    c.c_u = require(kv, "C_u");
    return c;
}

Calibration Calibration::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::ios_base::failure("calibration: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_map(parse_key_values(ss.str()));
}

void Calibration::save(const std::string& path, const std::string& header_comment) const
{
    std::ofstream out(path);
    if (!out)
        throw std::ios_base::failure("calibration: cannot write " + path);
    std::istringstream hc(header_comment);
    for (std::string line; std::getline(hc, line);)
        out << "# " << line << '\n';
    char buf[64];
    auto put = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%.6g", v);
        out << key << " = " << buf << '\n';
    };
    put("C_resolvent", c_resolvent);
    put("C_hardy", c_hardy);
    put("C_P", c_p);
    put("C_u", c_u);
}

}  // namespace pstab
