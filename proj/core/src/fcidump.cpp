#include "fluidfrag/fcidump.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <sstream>

namespace fluidfrag {

namespace {

constexpr double kDuplicateTol = 1e-10;

int parse_header_int(const std::string& header, const char* key, int line_no) {
    std::regex re(std::string(key) + R"(\s*=\s*([0-9]+))", std::regex::icase);
    std::smatch m;
    if (!std::regex_search(header, m, re))
        throw ParseError("FCIDUMP header (ending at line " + std::to_string(line_no) +
                         "): missing " + key);
    return std::stoi(m[1]);
}

struct SlotTracker {
    std::vector<char> written;
    double residual = 0.0;

    explicit SlotTracker(size_t n) : written(n, 0) {}

    // returns false when the slot was already set to a consistent value
    bool record(size_t slot, double old_value, double new_value, int line_no) {
        if (!written[slot]) {
            written[slot] = 1;
            return true;
        }
        const double dev = std::abs(old_value - new_value);
        residual = std::max(residual, dev);
        if (dev > kDuplicateTol)
            throw ParseError("FCIDUMP line " + std::to_string(line_no) +
                             ": duplicate entry disagrees with earlier value by " +
                             std::to_string(dev));
        return false;
    }
};

}  // namespace

RawIntegrals parse_fcidump(std::istream& in) {
    std::string line;
    int line_no = 0;

    // header: gather text until &END or a lone /
    std::string header;
    bool header_done = false;
    while (std::getline(in, line)) {
        ++line_no;
        header += line + "\n";
        const auto end = line.find("&END");
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t"));
        if (end != std::string::npos || (!trimmed.empty() && trimmed[0] == '/')) {
            header_done = true;
            break;
        }
    }
    if (!header_done)
        throw ParseError("FCIDUMP header: no &END or / terminator before line " +
                         std::to_string(line_no + 1));

    RawIntegrals raw;
    raw.n_orbitals = parse_header_int(header, "NORB", line_no);
    raw.n_electrons = parse_header_int(header, "NELEC", line_no);
    if (raw.n_orbitals <= 0)
        throw ParseError("FCIDUMP header: NORB must be positive");
    if (raw.n_electrons < 0 || raw.n_electrons > 2 * raw.n_orbitals)
        throw ParseError("FCIDUMP header: NELEC outside [0, 2*NORB]");

    const int n = raw.n_orbitals;
    raw.core_h = Eigen::MatrixXd::Zero(n, n);
    raw.eri = FourIndex(n);

    SlotTracker eri_slots(raw.eri.data().size());
    SlotTracker core_slots(static_cast<size_t>(n) * n);
    bool have_enuc = false;

    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        double value;
        long i, j, k, l;
        if (!(ls >> value)) {
            std::string rest;
            ls.clear();
            if (ls >> rest)
                throw ParseError("FCIDUMP line " + std::to_string(line_no) +
                                 ": expected a numeric value");
            continue;  // blank line
        }
        if (!(ls >> i >> j >> k >> l))
            throw ParseError("FCIDUMP line " + std::to_string(line_no) +
                             ": expected four orbital indices");
        std::string extra;
        if (ls >> extra)
            throw ParseError("FCIDUMP line " + std::to_string(line_no) +
                             ": trailing token '" + extra + "'");
        for (long idx : {i, j, k, l})
            if (idx < 0 || idx > n)
                throw ParseError("FCIDUMP line " + std::to_string(line_no) + ": index " +
                                 std::to_string(idx) + " outside [0, " + std::to_string(n) + "]");

        if (i == 0 && j == 0 && k == 0 && l == 0) {
            if (have_enuc && std::abs(raw.e_nuc - value) > kDuplicateTol)
                throw ParseError("FCIDUMP line " + std::to_string(line_no) +
                                 ": conflicting scalar energy entries");
            raw.e_nuc = value;
            have_enuc = true;
        } else if (k == 0 && l == 0 && i > 0 && j > 0) {
            const int a = static_cast<int>(i) - 1, b = static_cast<int>(j) - 1;
            const size_t slot = static_cast<size_t>(std::min(a, b)) * n + std::max(a, b);
            if (core_slots.record(slot, raw.core_h(a, b), value, line_no)) {
                raw.core_h(a, b) = value;
                raw.core_h(b, a) = value;
            }
        } else if (i > 0 && j > 0 && k > 0 && l > 0) {
            const int a = static_cast<int>(i) - 1, b = static_cast<int>(j) - 1;
            const int c = static_cast<int>(k) - 1, d = static_cast<int>(l) - 1;
            // canonical slot: minimum flat index over the 8 images
            const std::array<std::array<int, 4>, 8> images = {{{a, b, c, d},
                                                               {b, a, c, d},
                                                               {a, b, d, c},
                                                               {b, a, d, c},
                                                               {c, d, a, b},
                                                               {d, c, a, b},
                                                               {c, d, b, a},
                                                               {d, c, b, a}}};
            size_t slot = raw.eri.data().size();
            for (const auto& im : images)
                slot = std::min(slot, raw.eri.flat(im[0], im[1], im[2], im[3]));
            if (eri_slots.record(slot, raw.eri(a, b, c, d), value, line_no))
                for (const auto& im : images) raw.eri(im[0], im[1], im[2], im[3]) = value;
        } else {
            throw ParseError("FCIDUMP line " + std::to_string(line_no) +
                             ": unsupported index pattern");
        }
    }

    raw.duplicate_residual = std::max(eri_slots.residual, core_slots.residual);
    raw.validate();
    return raw;
}

RawIntegrals parse_fcidump_string(const std::string& text) {
    std::istringstream in(text);
    return parse_fcidump(in);
}

RawIntegrals parse_fcidump_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open FCIDUMP file: " + path);
    return parse_fcidump(in);
}

void write_fcidump(std::ostream& out, const RawIntegrals& raw) {
    const int n = raw.n_orbitals;
    out << "&FCI NORB=" << n << ",NELEC=" << raw.n_electrons << ",MS2=0,\n";
    out << "  ORBSYM=";
    for (int i = 0; i < n; ++i) out << "1,";
    out << "\n  ISYM=1,\n&END\n";

    char buf[96];
    auto emit = [&](double v, int i, int j, int k, int l) {
        std::snprintf(buf, sizeof(buf), " %.16E %4d %4d %4d %4d\n", v, i, j, k, l);
        out << buf;
    };

    auto pair_index = [](int i, int j) { return i * (i + 1) / 2 + j; };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j)
            for (int k = 0; k <= i; ++k)
                for (int l = 0; l <= k; ++l) {
                    if (pair_index(k, l) > pair_index(i, j)) continue;
                    const double v = raw.eri(i, j, k, l);
                    if (v != 0.0) emit(v, i + 1, j + 1, k + 1, l + 1);
                }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j)
            if (raw.core_h(i, j) != 0.0) emit(raw.core_h(i, j), i + 1, j + 1, 0, 0);
    emit(raw.e_nuc, 0, 0, 0, 0);
}

void write_fcidump_file(const std::string& path, const RawIntegrals& raw) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open file for writing: " + path);
    write_fcidump(out, raw);
}

}  // namespace fluidfrag
