#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gridattack/errors.hpp"
#include "gridattack/grid.hpp"
#include "gridattack/rng.hpp"

namespace gridattack {

enum class CaseFormat { Matpower, Cdf };

struct RawBusRecord {
    int id = 0;  // external numbering, preserved
    int type = 1;
    double load_mw = 0.0;
};

struct RawBranchRecord {
    int from = 0;
    int to = 0;
    double resistance = 0.0;
    double reactance = 0.0;
    bool in_service = true;
};

/// Case file contents before any merging or renumbering. Parallel branch
/// circuits stay separate records here.
struct RawCase {
    CaseFormat format = CaseFormat::Matpower;
    double base_mva = 100.0;
    std::vector<RawBusRecord> buses;
    std::vector<RawBranchRecord> branches;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream stream(line);
    std::string tok;
    while (stream >> tok) tokens.push_back(tok);
    return tokens;
}

inline double parse_number(const std::string& tok, int line_no, const char* what) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(tok, &used);
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": expected " + what + ", got '" +
                         tok + "'");
    }
    if (used != tok.size())
        throw ParseError("line " + std::to_string(line_no) + ": expected " + what + ", got '" +
                         tok + "'");
    return value;
}

inline int parse_int(const std::string& tok, int line_no, const char* what) {
    const double v = parse_number(tok, line_no, what);
    if (v != std::floor(v))
        throw ParseError("line " + std::to_string(line_no) + ": expected integer " + what +
                         ", got '" + tok + "'");
    return static_cast<int>(v);
}

inline std::string strip(std::string s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t start = 0;
    while (start < s.size() && is_space(static_cast<unsigned char>(s[start]))) ++start;
    return s.substr(start);
}

// Validates that branch endpoints reference declared buses; line numbers
// are per record so errors point at the offending row.
inline void check_references(const RawCase& raw, const std::vector<int>& branch_lines) {
    std::map<int, int> declared;
    for (std::size_t i = 0; i < raw.buses.size(); ++i) {
        if (!declared.emplace(raw.buses[i].id, static_cast<int>(i)).second)
            throw ParseError("duplicate bus id " + std::to_string(raw.buses[i].id));
    }
    for (std::size_t i = 0; i < raw.branches.size(); ++i) {
        for (int end : {raw.branches[i].from, raw.branches[i].to}) {
            if (!declared.count(end))
                throw ParseError("line " + std::to_string(branch_lines[i]) +
                                 ": branch references undeclared bus " + std::to_string(end));
        }
    }
}

inline RawCase parse_matpower(std::string_view text) {
    RawCase raw;
    raw.format = CaseFormat::Matpower;
    std::vector<int> branch_lines;

    enum class Section { None, Bus, Branch, Other };
    Section section = Section::None;

    std::istringstream stream{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (const auto comment = line.find('%'); comment != std::string::npos)
            line = line.substr(0, comment);
        std::string body = strip(line);
        if (body.empty()) continue;

        if (section == Section::None) {
            if (body.rfind("mpc.baseMVA", 0) == 0) {
                const auto eq = body.find('=');
                if (eq != std::string::npos) {
                    std::string value = strip(body.substr(eq + 1));
                    if (!value.empty() && value.back() == ';') value.pop_back();
                    raw.base_mva = parse_number(strip(value), line_no, "baseMVA");
                }
                continue;
            }
            const auto open = body.find('[');
            if (open == std::string::npos) continue;
            if (body.find(']', open) != std::string::npos) continue;  // one-line section
            if (body.rfind("mpc.bus", 0) == 0 && body.rfind("mpc.bus_", 0) != 0)
                section = Section::Bus;
            else if (body.rfind("mpc.branch", 0) == 0)
                section = Section::Branch;
            else
                section = Section::Other;
            continue;
        }

        if (body.find(']') != std::string::npos) {
            section = Section::None;
            continue;
        }
        if (section == Section::Other) continue;

        if (!body.empty() && body.back() == ';') body.pop_back();
        const std::vector<std::string> tokens = split_ws(body);
        if (section == Section::Bus) {
            if (tokens.size() < 3)
                throw ParseError("line " + std::to_string(line_no) +
                                 ": bus row needs at least id, type, and load columns");
            RawBusRecord bus;
            bus.id = parse_int(tokens[0], line_no, "bus id");
            bus.type = parse_int(tokens[1], line_no, "bus type");
            bus.load_mw = parse_number(tokens[2], line_no, "bus load");
            raw.buses.push_back(bus);
        } else {
            if (tokens.size() < 4)
                throw ParseError("line " + std::to_string(line_no) +
                                 ": branch row needs at least from, to, r, x columns");
            RawBranchRecord br;
            br.from = parse_int(tokens[0], line_no, "branch from-bus");
            br.to = parse_int(tokens[1], line_no, "branch to-bus");
            br.resistance = parse_number(tokens[2], line_no, "branch resistance");
            br.reactance = parse_number(tokens[3], line_no, "branch reactance");
            if (tokens.size() >= 11)
                br.in_service = parse_int(tokens[10], line_no, "branch status") != 0;
            raw.branches.push_back(br);
            branch_lines.push_back(line_no);
        }
    }

    if (raw.buses.empty()) throw ParseError("no bus records found");
    if (raw.branches.empty()) throw ParseError("no branch records found");
    check_references(raw, branch_lines);
    return raw;
}

// IEEE Common Data Format. Bus cards are fixed-column up to the 12-char
// name field (columns 7-17, may contain spaces); everything from column 19
// on is whitespace-separated. Branch cards are fully tokenizable.
inline RawCase parse_cdf(std::string_view text) {
    RawCase raw;
    raw.format = CaseFormat::Cdf;
    std::vector<int> branch_lines;

    std::istringstream stream{std::string(text)};
    std::string line;
    int line_no = 0;

    if (!std::getline(stream, line)) throw ParseError("empty file");
    ++line_no;
    if (line.size() >= 37) {
        const std::string mva = strip(line.substr(31, 6));
        if (!mva.empty()) {
            try {
                raw.base_mva = std::stod(mva);
            } catch (const std::exception&) {
                // title card without an MVA base; keep the default
            }
        }
    }

    enum class Section { None, Bus, Branch };
    Section section = Section::None;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string body = strip(line);
        if (body.empty()) continue;
        if (body.rfind("BUS DATA FOLLOWS", 0) == 0) {
            section = Section::Bus;
            continue;
        }
        if (body.rfind("BRANCH DATA FOLLOWS", 0) == 0) {
            section = Section::Branch;
            continue;
        }
        if (body.rfind("-9", 0) == 0 || body.rfind("END OF DATA", 0) == 0) {
            section = Section::None;
            continue;
        }
        if (section == Section::None) continue;

        if (section == Section::Bus) {
            if (line.size() < 19)
                throw ParseError("line " + std::to_string(line_no) + ": bus card too short");
            RawBusRecord bus;
            bus.id = parse_int(strip(line.substr(0, 4)), line_no, "bus number");
            const std::vector<std::string> tail = split_ws(line.substr(18));
            // area, zone, type, final voltage, final angle, load MW, ...
            if (tail.size() < 6)
                throw ParseError("line " + std::to_string(line_no) +
                                 ": bus card needs area, zone, type, voltage, angle, load fields");
            bus.type = parse_int(tail[2], line_no, "bus type");
            bus.load_mw = parse_number(tail[5], line_no, "bus load");
            raw.buses.push_back(bus);
        } else {
            const std::vector<std::string> tokens = split_ws(line);
            // tap bus, z bus, area, zone, circuit, type, r, x, ...
            if (tokens.size() < 8)
                throw ParseError("line " + std::to_string(line_no) +
                                 ": branch card needs endpoints through the reactance field");
            RawBranchRecord br;
            br.from = parse_int(tokens[0], line_no, "branch tap bus");
            br.to = parse_int(tokens[1], line_no, "branch z bus");
            br.resistance = parse_number(tokens[6], line_no, "branch resistance");
            br.reactance = parse_number(tokens[7], line_no, "branch reactance");
            raw.branches.push_back(br);
            branch_lines.push_back(line_no);
        }
    }

    if (raw.buses.empty()) throw ParseError("no bus records found");
    if (raw.branches.empty()) throw ParseError("no branch records found");
    check_references(raw, branch_lines);
    return raw;
}

}  // namespace detail

inline CaseFormat detect_format(std::string_view text) {
    if (text.find("BUS DATA FOLLOWS") != std::string_view::npos) return CaseFormat::Cdf;
    if (text.find("mpc.") != std::string_view::npos ||
        text.find("function") != std::string_view::npos)
        return CaseFormat::Matpower;
    throw ParseError("cannot detect case format (neither MATPOWER-style nor IEEE CDF markers)");
}

inline RawCase parse_case(std::string_view text, CaseFormat format) {
    if (detail::strip(std::string(text)).empty()) throw ParseError("empty file");
    return format == CaseFormat::Matpower ? detail::parse_matpower(text) : detail::parse_cdf(text);
}

/// Builds the solver-side network: scalar admittance 1/|r + jx| per branch,
/// parallel circuits merged by summing admittance, buses renumbered densely
/// in file order. Every bus starts as a consumer; demand is 1.0 per unit,
/// or load_mw / base_mva when `use_file_loads` is set. Out-of-service
/// branches are skipped.
inline GridNetwork to_network(const RawCase& raw, bool use_file_loads = false) {
    std::map<int, int> dense;  // external id -> dense id
    std::vector<Bus> buses;
    for (const RawBusRecord& rec : raw.buses) {
        const int id = static_cast<int>(buses.size());
        if (!dense.emplace(rec.id, id).second)
            throw ParseError("duplicate bus id " + std::to_string(rec.id));
        Bus bus;
        bus.id = id;
        bus.kind = BusKind::Consumer;
        bus.setpoint = use_file_loads ? std::max(0.0, rec.load_mw) / raw.base_mva : 1.0;
        bus.external_id = rec.id;
        buses.push_back(bus);
    }

    std::map<std::pair<int, int>, int> merged;  // dense endpoints -> branch id
    std::vector<Branch> branches;
    for (const RawBranchRecord& rec : raw.branches) {
        if (!rec.in_service) continue;
        const double impedance = std::hypot(rec.resistance, rec.reactance);
        if (impedance == 0.0)
            throw ParseError("branch " + std::to_string(rec.from) + "-" + std::to_string(rec.to) +
                             " has zero impedance");
        const int from = dense.at(rec.from);
        const int to = dense.at(rec.to);
        if (from == to)
            throw ParseError("branch " + std::to_string(rec.from) + "-" + std::to_string(rec.to) +
                             " is a self-loop");
        const double admittance = 1.0 / impedance;
        const auto key = std::minmax(from, to);
        if (auto it = merged.find(key); it != merged.end()) {
            branches[static_cast<std::size_t>(it->second)].admittance += admittance;
        } else {
            Branch br;
            br.id = static_cast<int>(branches.size());
            br.from = from;
            br.to = to;
            br.admittance = admittance;
            merged.emplace(key, br.id);
            branches.push_back(br);
        }
    }

    return GridNetwork::build(std::move(buses), std::move(branches));
}

/// Marks max(1, round(fraction * N)) randomly chosen buses as generators
/// with voltage setpoint 1.0; every other bus is a consumer. Intended for
/// the all-consumer network from to_network: a bus that was already a
/// generator falls back to the default demand of 1.0 when unselected.
/// Pure in (net, fraction, seed).
inline GridNetwork assign_generators(GridNetwork net, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw ConfigError("generator fraction must be in (0, 1]");
    const int n = net.node_count();
    const int count =
        std::max(1, static_cast<int>(std::floor(fraction * static_cast<double>(n) + 0.5)));
    Rng rng(seed);
    const std::vector<int> chosen = rng.sample(n, count);
    for (Bus& bus : net.buses) {
        if (bus.is_generator()) {
            bus.kind = BusKind::Consumer;
            bus.setpoint = 1.0;
        }
    }
    for (int id : chosen) {
        Bus& bus = net.buses[static_cast<std::size_t>(id)];
        bus.kind = BusKind::Generator;
        bus.setpoint = 1.0;
    }
    return net;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline RawCase load_case_file(const std::string& path,
                              std::optional<CaseFormat> format = std::nullopt) {
    const std::string text = read_file(path);
    try {
        return parse_case(text, format ? *format : detect_format(text));
    } catch (const ParseError& err) {
        throw ParseError(path + ": " + err.what());
    }
}

}  // namespace gridattack
