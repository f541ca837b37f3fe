#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "angleform/sim.hpp"

namespace angleform {

/// A parse or validation finding, tied to a 1-based source line when known.
struct Diagnostic {
    int line = 0;  // 0 when not tied to a specific line
    std::string message;
};

struct ParseResult {
    std::optional<Scenario> scenario;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return scenario.has_value() && diagnostics.empty(); }
};

namespace io_detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream is{std::string(s)};
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

inline bool parse_double(std::string_view s, double& out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

inline bool parse_int(std::string_view s, int& out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

struct PositionsSection {
    // agent id -> (line, x, y)
    struct Row { int line; Vec2 p; bool seen = false; };
    std::vector<Row> rows;
};

}  // namespace io_detail

/// Parses the sectioned scenario text format:
///   [agents]   n = <count>
///   [graph]    one "<agent>: <neighbor> ..." line per agent (1-based)
///   [target]   "<agent>: <x> <y>" rows; optional "reconstruct = x1 y1 x2 y2"
///              re-anchors the shape at the given leader/first-follower points
///   [initial]  "<agent>: <x> <y>" rows
///   [mode]     shape | maneuver [relative_position|distance_only|bearing_only]
///   [schedule] "t_start t_end vx vy dx dy" rows (maneuver only)
///   [sim]      dt, duration, activation, frame_offsets (degrees), seed
/// Returns a scenario plus any line-numbered diagnostics; the scenario is
/// absent when the text is structurally unusable.
inline ParseResult parse_scenario_text(std::string_view text) {
    using namespace io_detail;
    ParseResult result;
    auto fail = [&result](int line, std::string msg) {
        result.diagnostics.push_back({line, std::move(msg)});
    };

    int n = 0;
    int n_line = 0;
    std::vector<std::pair<int, std::vector<int>>> graph_rows;  // line, agent + neighbors
    PositionsSection target, initial;
    std::optional<std::pair<int, std::vector<double>>> reconstruct_row;
    std::optional<std::pair<int, std::vector<std::string>>> mode_row;
    std::vector<std::pair<int, std::vector<double>>> schedule_rows;
    double dt = 0.01, duration = 60.0;
    std::string activation = "simultaneous";
    double activation_eps = 1e-4;
    std::optional<std::pair<int, std::vector<double>>> offsets_row;
    std::uint64_t seed = 0;

    std::string section;
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        const size_t nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                             : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const size_t hash = raw.find('#'); hash != std::string_view::npos)
            raw = raw.substr(0, hash);
        const std::string_view line = trim(raw);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                fail(line_no, "unterminated section header");
                continue;
            }
            section = std::string(line.substr(1, line.size() - 2));
            const bool known = section == "agents" || section == "graph" || section == "target" ||
                               section == "initial" || section == "mode" ||
                               section == "schedule" || section == "sim";
            if (!known) fail(line_no, "unknown section [" + section + "]");
            continue;
        }
        if (section.empty()) {
            fail(line_no, "content before the first section header");
            continue;
        }

        // key = value split, when present
        std::string key, value;
        if (const size_t eq = line.find('='); eq != std::string_view::npos) {
            key = std::string(trim(line.substr(0, eq)));
            value = std::string(trim(line.substr(eq + 1)));
        }

        if (section == "agents") {
            int parsed = 0;
            if (key == "n" && parse_int(value, parsed) && parsed >= 2) {
                n = parsed;
                n_line = line_no;
            } else {
                fail(line_no, "expected \"n = <agent count>\"");
            }
        } else if (section == "graph") {
            const size_t colon = line.find(':');
            if (colon == std::string_view::npos) {
                fail(line_no, "expected \"<agent>: <neighbor> ...\"");
                continue;
            }
            int agent = 0;
            if (!parse_int(trim(line.substr(0, colon)), agent)) {
                fail(line_no, "bad agent id");
                continue;
            }
            std::vector<int> row{agent};
            bool ok = true;
            for (const std::string& tok : split_ws(line.substr(colon + 1))) {
                int v = 0;
                if (!parse_int(tok, v)) {
                    fail(line_no, "bad neighbor id \"" + tok + "\"");
                    ok = false;
                    break;
                }
                row.push_back(v);
            }
            if (ok) graph_rows.emplace_back(line_no, std::move(row));
        } else if (section == "target" || section == "initial") {
            PositionsSection& dst = section == "target" ? target : initial;
            if (key == "reconstruct") {
                if (section != "target") {
                    fail(line_no, "reconstruct applies to the [target] section only");
                    continue;
                }
                std::vector<double> vals;
                for (const std::string& tok : split_ws(value)) {
                    double v = 0;
                    if (!parse_double(tok, v)) {
                        fail(line_no, "bad anchor coordinate \"" + tok + "\"");
                        break;
                    }
                    vals.push_back(v);
                }
                if (vals.size() != 4)
                    fail(line_no, "reconstruct needs four values: x1 y1 x2 y2");
                else
                    reconstruct_row = {line_no, vals};
                continue;
            }
            const size_t colon = line.find(':');
            if (colon == std::string_view::npos) {
                fail(line_no, "expected \"<agent>: <x> <y>\"");
                continue;
            }
            int agent = 0;
            if (!parse_int(trim(line.substr(0, colon)), agent) || agent < 1) {
                fail(line_no, "bad agent id");
                continue;
            }
            const auto toks = split_ws(line.substr(colon + 1));
            double x = 0, y = 0;
            if (toks.size() != 2 || !parse_double(toks[0], x) || !parse_double(toks[1], y)) {
                fail(line_no, "expected two coordinates after the agent id");
                continue;
            }
            if (static_cast<size_t>(agent) > dst.rows.size())
                dst.rows.resize(static_cast<size_t>(agent));
            auto& row = dst.rows[static_cast<size_t>(agent) - 1];
            if (row.seen) fail(line_no, "duplicate position for agent " + std::to_string(agent));
            row = {line_no, {x, y}, true};
        } else if (section == "mode") {
            if (mode_row) {
                fail(line_no, "mode specified twice");
                continue;
            }
            mode_row = {line_no, split_ws(line)};
        } else if (section == "schedule") {
            const auto toks = split_ws(line);
            std::vector<double> vals;
            bool ok = true;
            for (const std::string& tok : toks) {
                double v = 0;
                if (!parse_double(tok, v)) {
                    fail(line_no, "bad schedule value \"" + tok + "\"");
                    ok = false;
                    break;
                }
                vals.push_back(v);
            }
            if (!ok) continue;
            if (vals.size() != 6) {
                fail(line_no, "schedule rows need six values: t_start t_end vx vy dx dy");
                continue;
            }
            schedule_rows.emplace_back(line_no, std::move(vals));
        } else if (section == "sim") {
            if (key.empty()) {
                fail(line_no, "expected \"key = value\"");
            } else if (key == "dt") {
                if (!parse_double(value, dt)) fail(line_no, "bad dt");
            } else if (key == "duration") {
                if (!parse_double(value, duration)) fail(line_no, "bad duration");
            } else if (key == "activation") {
                const auto toks = split_ws(value);
                if (toks.empty() ||
                    (toks[0] != "simultaneous" && toks[0] != "sequential")) {
                    fail(line_no, "activation must be simultaneous or sequential [epsilon]");
                } else {
                    activation = toks[0];
                    if (toks.size() > 1 && !parse_double(toks[1], activation_eps))
                        fail(line_no, "bad activation threshold");
                }
            } else if (key == "frame_offsets") {
                std::vector<double> vals;
                bool ok = true;
                for (const std::string& tok : split_ws(value)) {
                    double v = 0;
                    if (!parse_double(tok, v)) {
                        fail(line_no, "bad frame offset \"" + tok + "\"");
                        ok = false;
                        break;
                    }
                    vals.push_back(v);
                }
                if (ok) offsets_row = {line_no, vals};
            } else if (key == "seed") {
                int s = 0;
                if (!parse_int(value, s) || s < 0)
                    fail(line_no, "bad seed");
                else
                    seed = static_cast<std::uint64_t>(s);
            } else {
                fail(line_no, "unknown [sim] key \"" + key + "\"");
            }
        }
    }

    if (n == 0) {
        fail(0, "missing [agents] section with n");
        return result;
    }

    Scenario s;
    s.graph.n = n;
    s.graph.out_neighbors.assign(static_cast<size_t>(n), {});
    std::vector<bool> graph_seen(static_cast<size_t>(n), false);
    for (const auto& [line, row] : graph_rows) {
        const int agent = row[0];
        if (agent < 1 || agent > n) {
            fail(line, "agent " + std::to_string(agent) + " out of range (line ignored)");
            continue;
        }
        if (graph_seen[static_cast<size_t>(agent) - 1])
            fail(line, "duplicate graph row for agent " + std::to_string(agent));
        graph_seen[static_cast<size_t>(agent) - 1] = true;
        s.graph.out_neighbors[static_cast<size_t>(agent) - 1].assign(row.begin() + 1, row.end());
    }
    for (int a = 1; a <= n; ++a)
        if (!graph_seen[static_cast<size_t>(a) - 1] && a >= 2)
            fail(n_line, "missing graph row for agent " + std::to_string(a));

    auto take_positions = [&](io_detail::PositionsSection& sec, const char* name) {
        Configuration c;
        c.positions.resize(static_cast<size_t>(n));
        if (static_cast<int>(sec.rows.size()) > n)
            fail(sec.rows.back().line, std::string(name) + " lists more agents than n");
        for (int a = 1; a <= n; ++a) {
            if (static_cast<size_t>(a) > sec.rows.size() ||
                !sec.rows[static_cast<size_t>(a) - 1].seen) {
                fail(0, std::string("missing ") + name + " position for agent " +
                            std::to_string(a));
                continue;
            }
            c.agent(a) = sec.rows[static_cast<size_t>(a) - 1].p;
        }
        return c;
    };
    s.p_star = take_positions(target, "target");
    s.p0 = take_positions(initial, "initial");

    if (!mode_row) {
        fail(0, "missing [mode] section");
    } else {
        const auto& [line, toks] = *mode_row;
        if (toks.empty() || (toks[0] != "shape" && toks[0] != "maneuver")) {
            fail(line, "mode must be shape or maneuver");
        } else {
            s.mode.mode = toks[0] == "shape" ? Mode::Shape : Mode::Maneuver;
            if (toks.size() > 1) {
                if (toks[1] == "relative_position")
                    s.mode.variant = FollowerVariant::RelativePosition;
                else if (toks[1] == "distance_only")
                    s.mode.variant = FollowerVariant::DistanceOnly;
                else if (toks[1] == "bearing_only")
                    s.mode.variant = FollowerVariant::BearingOnly;
                else
                    fail(line, "unknown follower variant \"" + toks[1] + "\"");
            }
        }
    }

    for (const auto& [line, vals] : schedule_rows)
        s.schedule.push_back({vals[0], vals[1], {{vals[2], vals[3]}, {vals[4], vals[5]}}});

    s.dt = dt;
    s.duration = duration;
    s.activation = activation == "sequential" ? Activation::Sequential : Activation::Simultaneous;
    s.activation_epsilon = activation_eps;
    s.rng_seed = seed;
    if (offsets_row) {
        const auto& [line, vals] = *offsets_row;
        if (static_cast<int>(vals.size()) != n) {
            fail(line, "frame_offsets needs one angle (degrees) per agent");
        } else {
            FrameOffsets fo;
            for (double deg : vals) fo.to_local.emplace_back(deg_to_rad(deg));
            s.frame_offsets = std::move(fo);
        }
    }

    if (!result.diagnostics.empty()) return result;

    if (reconstruct_row) {
        const auto& [line, vals] = *reconstruct_row;
        // Re-anchor the given shape at the stated leader/first-follower points.
        const auto graph_diags = validate_lff(s.graph);
        if (!graph_diags.empty()) {
            fail(line, "reconstruct requires a valid sensing graph: " + graph_diags.front());
            return result;
        }
        try {
            const AngleConstraintSet acs = extract_angles(s.p_star, triangle_set(s.graph));
            s.p_star = reconstruct(Vec2{vals[0], vals[1]}, Vec2{vals[2], vals[3]}, acs);
        } catch (const Error& e) {
            fail(line, std::string("reconstruct failed: ") + e.what());
            return result;
        }
    }

    result.scenario = std::move(s);
    return result;
}

inline ParseResult load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        ParseResult r;
        r.diagnostics.push_back({0, "cannot open " + path});
        return r;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

/// Renders a scenario back into the text format (positions at full precision).
inline std::string format_scenario(const Scenario& s) {
    std::ostringstream out;
    out.precision(17);
    out << "[agents]\nn = " << s.graph.n << "\n\n[graph]\n";
    for (int a = 1; a <= s.graph.n; ++a) {
        out << a << ":";
        for (int b : s.graph.neighbors(a)) out << " " << b;
        out << "\n";
    }
    auto dump = [&out](const Configuration& c, const char* name) {
        out << "\n[" << name << "]\n";
        for (int a = 1; a <= c.size(); ++a)
            out << a << ": " << c.agent(a).x << " " << c.agent(a).y << "\n";
    };
    dump(s.p_star, "target");
    dump(s.p0, "initial");
    out << "\n[mode]\n" << (s.mode.mode == Mode::Shape ? "shape" : "maneuver");
    if (s.mode.mode == Mode::Maneuver) {
        switch (s.mode.variant) {
            case FollowerVariant::RelativePosition: out << " relative_position"; break;
            case FollowerVariant::DistanceOnly: out << " distance_only"; break;
            case FollowerVariant::BearingOnly: out << " bearing_only"; break;
        }
    }
    out << "\n";
    if (!s.schedule.empty()) {
        out << "\n[schedule]\n";
        for (const auto& seg : s.schedule)
            out << seg.t_start << " " << seg.t_end << " " << seg.ref.v_r.x << " "
                << seg.ref.v_r.y << " " << seg.ref.delta_12.x << " " << seg.ref.delta_12.y
                << "\n";
    }
    out << "\n[sim]\ndt = " << s.dt << "\nduration = " << s.duration << "\n";
    out << "activation = "
        << (s.activation == Activation::Sequential
                ? "sequential " + std::to_string(s.activation_epsilon)
                : "simultaneous")
        << "\n";
    if (s.frame_offsets) {
        out << "frame_offsets =";
        for (const Rot2& r : s.frame_offsets->to_local) out << " " << rad_to_deg(r.theta);
        out << "\n";
    }
    if (s.rng_seed != 0) out << "seed = " << s.rng_seed << "\n";
    return out.str();
}

}  // namespace angleform
