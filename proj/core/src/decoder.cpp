#include "qecool/decoder.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace qecool {

namespace {

std::string unit_name(int r, int c) {
    return "u(" + std::to_string(r) + "," + std::to_string(c) + ")";
}

std::string row_master_name(int r) { return "rm" + std::to_string(r); }

std::optional<std::pair<int, int>> neighbor_of(int r, int c, Direction dir, int rows, int cols) {
    switch (dir) {
        case Direction::North: r -= 1; break;
        case Direction::South: r += 1; break;
        case Direction::East: c += 1; break;
        case Direction::West: c -= 1; break;
    }
    if (r < 0 || r >= rows || c < 0 || c >= cols) return std::nullopt;
    return std::make_pair(r, c);
}

Direction direction_from(std::pair<int, int> from, std::pair<int, int> to) {
    if (to.first == from.first) return to.second > from.second ? Direction::East : Direction::West;
    return to.first > from.first ? Direction::South : Direction::North;
}

}  // namespace

std::string to_string(DecodeMode mode) {
    switch (mode) {
        case DecodeMode::TwoD: return "2d";
        case DecodeMode::Batch3D: return "batch";
        case DecodeMode::Online3D: return "online";
    }
    return "?";
}

Direction rotate_180(Direction dir) {
    switch (dir) {
        case Direction::North: return Direction::South;
        case Direction::South: return Direction::North;
        case Direction::East: return Direction::West;
        case Direction::West: return Direction::East;
    }
    return Direction::North;
}

std::string to_string(Direction dir) {
    switch (dir) {
        case Direction::North: return "N";
        case Direction::East: return "E";
        case Direction::South: return "S";
        case Direction::West: return "W";
    }
    return "?";
}

Direction route_spike(int unit_row, int current_row, bool flag_token) {
    if (unit_row == current_row) return flag_token ? Direction::East : Direction::West;
    return flag_token ? Direction::South : Direction::North;
}

uint64_t DecoderConfig::cycles_per_round() const {
    const double cycles = clock_hz * meas_interval_s;
    return cycles < 1.0 ? 1 : uint64_t(std::llround(cycles));
}

void DecoderConfig::validate(int d) const {
    if (d < 3 || d % 2 == 0)
        throw std::invalid_argument("code distance must be odd and >= 3");
    if (reg_depth < 1) throw std::invalid_argument("reg_depth must be >= 1");
    if (th_v < -1) throw std::invalid_argument("th_v must be >= -1");
    if (th_v >= 0 && reg_depth < th_v + 1)
        throw std::invalid_argument("reg_depth must be >= th_v + 1");
    if (n_depth < 1) throw std::invalid_argument("n_depth must be >= 1");
    if (n_limit < 0) throw std::invalid_argument("n_limit must be >= 0");
    if (timeout_base < 0 || timeout_per_hop < 0 || timeout(1) < 1)
        throw std::invalid_argument("timeout parameters must grant at least one cycle");
    if (boundary_spike_delay < 0)
        throw std::invalid_argument("boundary_spike_delay must be >= 0");
    if (clock_hz <= 0.0) throw std::invalid_argument("clock_hz must be positive");
    if (meas_interval_s <= 0.0) throw std::invalid_argument("meas_interval_s must be positive");
    if (mode == DecodeMode::TwoD && (n_depth != 1 || th_v != -1))
        throw std::invalid_argument("2-D mode requires n_depth = 1 and th_v = -1");
    if (mode == DecodeMode::Batch3D && th_v != -1)
        throw std::invalid_argument("batch mode requires th_v = -1");
}

DecoderConfig make_decoder_config(DecodeMode mode, int d, int total_layers) {
    DecoderConfig cfg;
    cfg.mode = mode;
    switch (mode) {
        case DecodeMode::TwoD:
            cfg.reg_depth = std::max(1, total_layers);
            cfg.n_depth = 1;
            cfg.th_v = -1;
            break;
        case DecodeMode::Batch3D:
            cfg.reg_depth = std::max(total_layers, 2);
            cfg.n_depth = std::max(1, total_layers - 1);
            cfg.th_v = -1;
            break;
        case DecodeMode::Online3D:
            cfg.reg_depth = 7;
            cfg.n_depth = cfg.reg_depth;
            cfg.th_v = 3;
            break;
    }
    cfg.validate(d);
    return cfg;
}

int UnitState::first_set(int from, int occupancy) const {
    for (int i = std::max(from, 0); i < occupancy && i < int(reg.size()); ++i)
        if (reg[size_t(i)]) return i;
    return -1;
}

void CycleStats::add(uint64_t cycles) {
    ++layers;
    total += cycles;
    total_sq += cycles * cycles;
    max = std::max(max, cycles);
}

void CycleStats::merge(const CycleStats& other) {
    layers += other.layers;
    total += other.total;
    total_sq += other.total_sq;
    max = std::max(max, other.max);
}

double CycleStats::mean() const { return layers == 0 ? 0.0 : double(total) / double(layers); }

double CycleStats::stddev() const {
    if (layers == 0) return 0.0;
    const double m = mean();
    const double var = double(total_sq) / double(layers) - m * m;
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

int64_t DecodeResult::matching_weight() const {
    int64_t w = 0;
    for (const auto& m : matches) w += m.weight;
    return w;
}

CycleStats DecodeResult::cycle_stats() const {
    CycleStats stats;
    for (uint32_t c : layer_cycles) stats.add(c);
    return stats;
}

std::string to_string(const TraceEvent& ev) {
    return std::to_string(ev.cycle) + " " + ev.kind + " " + ev.src + " " + ev.dst;
}

// ---------------------------------------------------------------------------
// Spike window: exact per-cycle race resolution.
// ---------------------------------------------------------------------------

SpikeWindow::Outcome SpikeWindow::run(TraceSink* trace, uint64_t cycle_base) const {
    Outcome out;

    struct Flight {
        int r = 0, c = 0;          // unit entered this cycle
        Direction entry;           // side it came from (toward its origin)
        bool from_boundary = false;
        BoundarySide bside{BoundarySide::West};
        std::vector<std::pair<int, int>> visited;  // traversed units, origin first
    };

    auto idx = [&](int r, int c) { return size_t(r * cols + c); };
    auto emit = [&](uint64_t at, const char* kind, std::string src, std::string dst) {
        if (trace) (*trace)({at, kind, std::move(src), std::move(dst)});
    };

    std::vector<uint8_t> relay_used(size_t(rows * cols), 0);
    std::vector<Flight> now, next;

    auto forward = [&](Flight&& f, int tau) {
        // Relay or emission: one hop toward the raster position.
        const auto& u = units[idx(f.r, f.c)];
        const Direction route = route_spike(f.r, current_row, u.flag_token);
        const auto to = neighbor_of(f.r, f.c, route, rows, cols);
        if (!to) {
            emit(cycle_base + uint64_t(tau) + 1, "drop", unit_name(f.r, f.c), "edge");
            return;
        }
        emit(cycle_base + uint64_t(tau) + 1, "spike", unit_name(f.r, f.c),
             unit_name(to->first, to->second));
        f.visited.emplace_back(f.r, f.c);
        f.r = to->first;
        f.c = to->second;
        f.entry = rotate_180(route);
        next.push_back(std::move(f));
    };

    auto resolve = [&](const Flight& f, int arrival) {
        // Retrace the winner's path from the sink; the Correct signal is
        // consumed by the first unit that has emitted a spike by the time the
        // signal reaches it, otherwise the correction exits at the boundary.
        std::vector<std::pair<int, int>> back;
        back.emplace_back(sink_r, sink_c);
        for (auto it = f.visited.rbegin(); it != f.visited.rend(); ++it) back.push_back(*it);

        for (size_t k = 1; k < back.size(); ++k) {
            const auto [ur, uc] = back[k];
            const int fs = units[idx(ur, uc)].first_set;
            if (fs >= 0 && fs - base <= arrival + int(k)) {
                out.kind = Outcome::Kind::Partner;
                out.arrival = arrival;
                out.stop_r = ur;
                out.stop_c = uc;
                out.stop_depth = fs;
                out.path.assign(back.begin(), back.begin() + long(k) + 1);
                out.retrace_hops = int(k);
                return;
            }
        }
        if (f.from_boundary) {
            out.kind = Outcome::Kind::Boundary;
            out.arrival = arrival;
            out.side = f.bside;
            out.path = back;
            out.retrace_hops = int(back.size());  // hops within the grid + exit
            return;
        }
        // The origin always qualifies as a stop; reaching here means the
        // flight bookkeeping is inconsistent.
        assert(false && "spike flight without a consumable origin");
        out.kind = Outcome::Kind::None;
    };

    for (int tau = 0; tau <= timeout; ++tau) {
        const uint64_t at = cycle_base + uint64_t(tau);

        // The sink's own later Reg bit wins every tie: it needs no hop.
        if (self_first_set >= 0 && self_first_set - base == tau) {
            out.kind = Outcome::Kind::SelfVertical;
            out.arrival = tau;
            out.stop_r = sink_r;
            out.stop_c = sink_c;
            out.stop_depth = self_first_set;
            out.retrace_hops = 0;
            emit(at, "spike", unit_name(sink_r, sink_c), unit_name(sink_r, sink_c));
            return out;
        }

        // Boundary Units answer every request, one cycle late.
        if (tau == boundary_delay + 1) {
            Flight west{current_row, 0, Direction::West, true, BoundarySide::West, {}};
            emit(at, "spike", "west", unit_name(west.r, west.c));
            now.push_back(std::move(west));
            Flight east{current_row, cols - 1, Direction::East, true, BoundarySide::East, {}};
            emit(at, "spike", "east", unit_name(east.r, east.c));
            now.push_back(std::move(east));
        }

        // Arrivals and relays. Spikes entering the same unit in the same
        // cycle resolve by the race-logic port priority N > E > S > W, with
        // Boundary Unit spikes carrying a sub-cycle extra delay so they lose
        // every simultaneous race against a normal spike; a relay serves at
        // most one spike per window.
        auto race_rank = [&](const Flight& f) {
            return (f.from_boundary ? 4 : 0) + int(f.entry);
        };
        int best_arrival = -1;
        for (size_t fi = 0; fi < now.size(); ++fi) {
            const Flight& f = now[fi];
            if (f.r == sink_r && f.c == sink_c) {
                if (best_arrival < 0 || race_rank(f) < race_rank(now[size_t(best_arrival)]))
                    best_arrival = int(fi);
            }
        }
        if (best_arrival >= 0) {
            resolve(now[size_t(best_arrival)], tau);
            return out;
        }

        std::vector<int> claim(size_t(rows * cols), -1);
        for (size_t fi = 0; fi < now.size(); ++fi) {
            const Flight& f = now[fi];
            if (f.r == sink_r && f.c == sink_c) continue;
            if (relay_used[idx(f.r, f.c)]) {
                emit(at, "drop", unit_name(f.r, f.c), "used");
                continue;
            }
            int& slot = claim[idx(f.r, f.c)];
            if (slot < 0 || race_rank(f) < race_rank(now[size_t(slot)])) slot = int(fi);
        }

        next.clear();
        for (size_t ui = 0; ui < claim.size(); ++ui) {
            if (claim[ui] < 0) continue;
            relay_used[ui] = 1;
            forward(std::move(now[size_t(claim[ui])]), tau);
        }

        // Depth-scan launches: each unit fires once, at its first set bit.
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                if (r == sink_r && c == sink_c) continue;
                const int fs = units[idx(r, c)].first_set;
                if (fs < 0 || fs - base != tau) continue;
                Flight f{r, c, Direction::North, false, BoundarySide::West, {}};
                forward(std::move(f), tau);
            }
        }

        now.swap(next);
        if (now.empty() && self_first_set < 0) {
            // Nothing in flight and nothing left to launch except boundaries.
            bool pending = tau < boundary_delay + 1;
            for (const auto& u : units)
                pending = pending || (u.first_set >= 0 && u.first_set - base > tau);
            if (!pending) break;
        }
    }

    out.kind = Outcome::Kind::None;
    return out;
}

// ---------------------------------------------------------------------------
// Decoder
// ---------------------------------------------------------------------------

Decoder::Decoder(int d, DecoderConfig cfg, TraceSink trace)
    : d_(d),
      rows_(d),
      cols_(d - 1),
      cfg_(cfg),
      th_v_(cfg.th_v),
      n_limit_(cfg.effective_n_limit(d)),
      trace_(std::move(trace)),
      corrections_(d * d + (d - 1) * (d - 1)) {
    cfg_.validate(d);
    units_.resize(size_t(rows_ * cols_));
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c)
            unit_mut(r, c).reg.assign(size_t(cfg_.reg_depth), 0);
    row_bits_.assign(size_t(rows_), 0);
    row_reg0_.assign(size_t(rows_), 0);
}

void Decoder::trace(uint64_t cycle, const char* kind, std::string src, std::string dst) {
    if (trace_) trace_({cycle, kind, std::move(src), std::move(dst)});
}

void Decoder::push_measurement(std::span<const uint8_t> event_bits) {
    if (int(event_bits.size()) != rows_ * cols_)
        throw std::invalid_argument("push_measurement expects one bit per unit");
    if (overflowed_) return;
    if (m_ == cfg_.reg_depth) {
        overflowed_ = true;
        trace(cycle_, "overflow", "ctrl", "all");
        return;
    }
    // New data re-arms the Controller: the scan restarts from the first hop
    // limit, exactly as a Pop does.
    pass_active_ = false;
    for (int r = 0; r < rows_; ++r) {
        for (int c = 0; c < cols_; ++c) {
            const uint8_t bit = event_bits[size_t(r * cols_ + c)] ? 1 : 0;
            if (!bit) continue;
            unit_mut(r, c).reg[size_t(m_)] = 1;
            ++row_bits_[size_t(r)];
            ++total_bits_;
            if (m_ == 0) ++row_reg0_[size_t(r)];
        }
    }
    ++m_;
    trace(cycle_, "push", "ctrl", "all");
}

void Decoder::advance_clock_to(uint64_t cycle) {
    if (cycle_ < cycle) cycle_ = cycle;
}

void Decoder::clear_flags() {
    for (auto& u : units_) u.flag_token = false;
}

void Decoder::mark_row_flags(int row) {
    for (int c = 0; c < cols_; ++c) unit_mut(row, c).flag_token = true;
}

void Decoder::pop_layer() {
    assert(m_ > 0);
    for (auto& u : units_) {
        for (int i = 1; i < cfg_.reg_depth; ++i) u.reg[size_t(i) - 1] = u.reg[size_t(i)];
        u.reg[size_t(cfg_.reg_depth) - 1] = 0;
    }
    --m_;
    ++pops_;
    std::fill(row_bits_.begin(), row_bits_.end(), 0);
    std::fill(row_reg0_.begin(), row_reg0_.end(), 0);
    total_bits_ = 0;
    for (int r = 0; r < rows_; ++r) {
        for (int c = 0; c < cols_; ++c) {
            const auto& reg = unit(r, c).reg;
            for (int i = 0; i < m_; ++i) {
                if (!reg[size_t(i)]) continue;
                ++row_bits_[size_t(r)];
                ++total_bits_;
                if (i == 0) ++row_reg0_[size_t(r)];
            }
        }
    }
    trace(cycle_, "pop", "ctrl", "all");
}

void Decoder::clear_bit(int r, int c, int depth) {
    UnitState& u = unit_mut(r, c);
    assert(u.reg[size_t(depth)]);
    u.reg[size_t(depth)] = 0;
    --row_bits_[size_t(r)];
    --total_bits_;
    if (depth == 0) --row_reg0_[size_t(r)];
}

void Decoder::flip_between(int r1, int c1, int r2, int c2) {
    DataQubitIndex q{};
    if (r1 == r2) {
        q = horizontal_qubit(r1, std::max(c1, c2));
    } else {
        q = vertical_qubit(std::min(r1, r2), c1);
    }
    const int d = d_;
    const int id = q.kind == QubitKind::Horizontal ? q.r * d + q.i
                                                   : d * d + q.r * (d - 1) + q.i;
    corrections_.toggle(id);
    trace(cycle_, "correct", unit_name(r1, c1), to_string(q));
}

void Decoder::flip_boundary_exit(int r, BoundarySide side) {
    const DataQubitIndex q =
        side == BoundarySide::West ? horizontal_qubit(r, 0) : horizontal_qubit(r, d_ - 1);
    const int id = q.r * d_ + q.i;
    corrections_.toggle(id);
    trace(cycle_, "correct", unit_name(r, side == BoundarySide::West ? 0 : cols_ - 1),
          to_string(q));
}

SpikeWindow Decoder::build_window(int r, int c, int base, int timeout) const {
    SpikeWindow win;
    win.rows = rows_;
    win.cols = cols_;
    win.sink_r = r;
    win.sink_c = c;
    win.base = base;
    win.current_row = ctl_.current_row;
    win.timeout = timeout;
    win.boundary_delay = cfg_.boundary_spike_delay;
    // th_v bounds the vertical search: the depth scan stops th_v layers
    // above the base (unbounded when th_v = -1).
    const int scan_top = th_v_ >= 0 ? std::min(m_, base + th_v_ + 1) : m_;
    win.units.resize(size_t(rows_ * cols_));
    for (int rr = 0; rr < rows_; ++rr) {
        for (int cc = 0; cc < cols_; ++cc) {
            if (rr == r && cc == c) continue;
            auto& in = win.units[size_t(rr * cols_ + cc)];
            const UnitState& u = unit(rr, cc);
            in.first_set = u.first_set(base, scan_top);
            in.flag_token = u.flag_token;
        }
    }
    win.self_first_set = unit(r, c).first_set(base + 1, scan_top);
    return win;
}

// The Controller sweeps every base depth up to N_depth regardless of the
// current occupancy; depths at or above m simply find nothing to do.
int Decoder::max_base() const { return cfg_.n_depth; }

uint64_t Decoder::token_step(int r, int c) {
    UnitState& u = unit_mut(r, c);
    u.hold_token = true;
    u.flag_token = true;
    u.base = ctl_.base;
    trace(cycle_, "token", "ctrl", unit_name(r, c));
    trace(cycle_, "restart", "ctrl", "all");

    // Restart drops routing state saved for the previous match.
    for (auto [pr, pc] : last_dir_path_) unit_mut(pr, pc).dir.reset();
    last_dir_path_.clear();

    ctl_.shift = ctl_.shift && u.reg[0] == 0;

    // One cycle for the token handoff, one for the unit's Reg readout and
    // Finish/request decision; the controller advances only on Finish.
    uint64_t cost = 2;
    const int b = ctl_.base;
    if (b >= m_ || !u.reg[size_t(b)]) {
        trace(cycle_ + 1, "finish", unit_name(r, c), "ctrl");
        u.hold_token = false;
        return cost;
    }

    trace(cycle_ + 1, "request-spike", unit_name(r, c), "all");
    // timeout(C) grants spike out + syndrome back over C hops plus slack, so
    // the sink accepts arrivals of at most C cycles: the hop limit grows by
    // exactly one lattice step per iteration, and the retrace (never longer
    // than the arrival) completes inside the controller's window.
    const int timeout = cfg_.timeout(ctl_.hop_limit);
    const SpikeWindow win = build_window(r, c, b, ctl_.hop_limit);
    const auto res = win.run(trace_ ? &trace_ : nullptr, cycle_ + 1);

    const auto abs_round = [&](int depth) { return int16_t(pops_ + depth); };

    switch (res.kind) {
        case SpikeWindow::Outcome::Kind::None:
            trace(cycle_ + uint64_t(timeout), "timeout", "ctrl", unit_name(r, c));
            cost += uint64_t(timeout);
            break;
        case SpikeWindow::Outcome::Kind::SelfVertical: {
            clear_bit(r, c, b);
            clear_bit(r, c, res.stop_depth);
            MatchRecord rec;
            rec.kind = MatchRecord::Kind::Vertical;
            rec.a = {int16_t(r), int16_t(c), abs_round(b)};
            rec.b = {int16_t(r), int16_t(c), abs_round(res.stop_depth)};
            rec.weight = res.stop_depth - b;
            matches_.push_back(rec);
            pass_progressed_ = true;
            cost += uint64_t(res.arrival);
            trace(cycle_ + uint64_t(res.arrival), "finish", unit_name(r, c), "ctrl");
            break;
        }
        case SpikeWindow::Outcome::Kind::Partner: {
            clear_bit(r, c, b);
            clear_bit(res.stop_r, res.stop_c, res.stop_depth);
            for (size_t k = 0; k + 1 < res.path.size(); ++k) {
                const auto [ar, ac] = res.path[k];
                const auto [br, bc] = res.path[k + 1];
                unit_mut(ar, ac).dir = direction_from({ar, ac}, {br, bc});
                last_dir_path_.emplace_back(ar, ac);
                trace(cycle_ + uint64_t(res.arrival) + k + 1, "syndrome", unit_name(ar, ac),
                      unit_name(br, bc));
                flip_between(ar, ac, br, bc);
            }
            MatchRecord rec;
            rec.kind = MatchRecord::Kind::Pair;
            rec.a = {int16_t(r), int16_t(c), abs_round(b)};
            rec.b = {int16_t(res.stop_r), int16_t(res.stop_c), abs_round(res.stop_depth)};
            rec.weight = std::abs(r - res.stop_r) + std::abs(c - res.stop_c) +
                         (res.stop_depth - b);
            matches_.push_back(rec);
            pass_progressed_ = true;
            cost += uint64_t(res.arrival + res.retrace_hops);
            trace(cycle_ + uint64_t(res.arrival + res.retrace_hops), "finish",
                  unit_name(res.stop_r, res.stop_c), "ctrl");
            break;
        }
        case SpikeWindow::Outcome::Kind::Boundary: {
            clear_bit(r, c, b);
            for (size_t k = 0; k + 1 < res.path.size(); ++k) {
                const auto [ar, ac] = res.path[k];
                const auto [br, bc] = res.path[k + 1];
                unit_mut(ar, ac).dir = direction_from({ar, ac}, {br, bc});
                last_dir_path_.emplace_back(ar, ac);
                trace(cycle_ + uint64_t(res.arrival) + k + 1, "syndrome", unit_name(ar, ac),
                      unit_name(br, bc));
                flip_between(ar, ac, br, bc);
            }
            flip_boundary_exit(res.path.back().first, res.side);
            MatchRecord rec;
            rec.kind = MatchRecord::Kind::Boundary;
            rec.a = {int16_t(r), int16_t(c), abs_round(b)};
            rec.side = res.side;
            rec.weight = boundary_weight(d_, {int16_t(r), int16_t(c), 0}, res.side);
            matches_.push_back(rec);
            pass_progressed_ = true;
            cost += uint64_t(res.arrival + res.retrace_hops);
            trace(cycle_ + uint64_t(res.arrival + res.retrace_hops), "finish",
                  res.side == BoundarySide::West ? "west" : "east", "ctrl");
            break;
        }
    }
    u.hold_token = false;
    return cost;
}

SpikeWindow::Outcome Decoder::probe_window(int r, int c, int base, int timeout) {
    clear_flags();
    for (int row = 0; row < r; ++row) mark_row_flags(row);
    for (int col = 0; col <= c; ++col) unit_mut(r, col).flag_token = true;
    ctl_.current_row = r;
    const SpikeWindow win = build_window(r, c, base, timeout);
    return win.run(trace_ ? &trace_ : nullptr, cycle_);
}

Decoder::PassOutcome Decoder::run_decode_pass(uint64_t cycle_deadline) {
    PassOutcome out;
    const uint64_t start_cycle = cycle_;

    if (!pass_active_) {
        if (all_clear()) {
            out.all_clear = true;
            return out;
        }
        pass_active_ = true;
        ctl_ = ControllerState{};
        pos_ = RasterPos{};
        raster_any_token_ = false;
        raster_cycles_ = 0;
        sweep_pending_ = 0;
        tokens_this_sweep_ = 0;
        pops_this_sweep_ = 0;
        pass_progressed_ = false;
    }

    bool finished = false;
    bool finished_clear = false;

    while (!finished && cycle_ < cycle_deadline) {
        if (pos_.row == rows_) {
            // End of raster: sendResetFlag, then Pop when every visited
            // oldest bit was zero, restarting the whole loop. Rasters count
            // toward the per-layer cycle attribution when their hop-limit
            // sweep does real work (issues tokens or pops); a sweep that only
            // spins against the th_v gate is idle time.
            clear_flags();
            const bool counted = raster_any_token_;
            bool popped = false;
            if (ctl_.shift) {
                if (m_ > 0) {
                    attributed_cycles_ += sweep_pending_ + raster_cycles_;
                    sweep_pending_ = 0;
                    layer_cycles_.push_back(
                        uint32_t(std::min<uint64_t>(attributed_cycles_, UINT32_MAX)));
                    attributed_cycles_ = 0;
                    pop_layer();
                    ++pops_this_sweep_;
                    pass_progressed_ = true;
                    popped = true;
                    ctl_.hop_limit = 1;
                    ctl_.base = 0;
                    tokens_this_sweep_ = 0;
                    pops_this_sweep_ = 0;
                    if (m_ == 0) {
                        finished = true;
                        finished_clear = true;
                    }
                } else {
                    finished = true;
                    finished_clear = true;
                }
            }
            if (!finished && !popped) {
                if (counted) {
                    attributed_cycles_ += sweep_pending_ + raster_cycles_;
                    sweep_pending_ = 0;
                } else {
                    sweep_pending_ += raster_cycles_;
                }
                ++ctl_.base;
                if (ctl_.base > max_base()) {
                    // One full hop-limit sweep completed.
                    sweep_pending_ = 0;  // trailing stalled rasters are idle
                    ctl_.base = 0;
                    ++ctl_.hop_limit;
                    tokens_this_sweep_ = 0;
                    pops_this_sweep_ = 0;
                    if (ctl_.hop_limit > n_limit_) finished = true;
                }
            }
            pos_ = RasterPos{};
            ctl_.shift = true;
            raster_any_token_ = false;
            raster_cycles_ = 0;
            continue;
        }

        if (pos_.col < 0) {
            // Row Master: hand the token past an empty (or gate-blocked) row.
            const int i = pos_.row;
            if (!gate_open(ctl_.base) || row_bits_[size_t(i)] == 0) {
                ctl_.shift = ctl_.shift && row_reg0_[size_t(i)] == 0;
                mark_row_flags(i);
                trace(cycle_, "token", row_master_name(i), row_master_name(i + 1));
                ++pos_.row;
                cycle_ += 1;
                raster_cycles_ += 1;
                continue;
            }
            ctl_.current_row = i;
            pos_.col = 0;
            continue;
        }

        raster_any_token_ = true;
        ++tokens_this_sweep_;
        const uint64_t cost = token_step(pos_.row, pos_.col);
        cycle_ += cost;
        raster_cycles_ += cost;
        ++pos_.col;
        if (pos_.col == cols_) {
            pos_.col = -1;
            ++pos_.row;
        }
    }

    if (finished) pass_active_ = false;
    out.cycles = cycle_ - start_cycle;
    out.all_clear = finished_clear;
    out.progressed = pass_progressed_;
    return out;
}

DecodeResult decode_trial(const SyndromeHistory& syndromes, int d, const DecoderConfig& cfg,
                          TraceSink trace) {
    Decoder dec(d, cfg, std::move(trace));
    const int rounds = syndromes.rounds();

    auto drain = [&]() {
        // Give up only when a pass that started from scratch makes no
        // progress; a resumed pass near its hop-limit end says nothing.
        while (!dec.all_clear()) {
            const bool fresh = !dec.pass_active();
            const auto out = dec.run_decode_pass();
            if (out.all_clear) break;
            if (fresh && !out.progressed) break;
        }
    };

    if (cfg.mode == DecodeMode::Online3D) {
        const uint64_t budget = cfg.cycles_per_round();
        for (int k = 0; k < rounds && !dec.overflowed(); ++k) {
            dec.advance_clock_to(uint64_t(k) * budget);
            dec.push_measurement(syndromes.events[size_t(k)]);
            if (dec.overflowed()) break;
            const uint64_t deadline = uint64_t(k + 1) * budget;
            while (dec.clock() < deadline && !dec.all_clear()) {
                const auto out = dec.run_decode_pass(deadline);
                if (out.all_clear) break;
            }
            dec.advance_clock_to(deadline);
        }
        if (!dec.overflowed()) {
            dec.begin_drain();
            drain();
        }
    } else {
        for (int k = 0; k < rounds && !dec.overflowed(); ++k)
            dec.push_measurement(syndromes.events[size_t(k)]);
        if (!dec.overflowed()) drain();
    }

    DecodeResult result;
    result.status = dec.overflowed()          ? DecodeStatus::Overflow
                    : dec.all_clear() ? DecodeStatus::Ok
                                      : DecodeStatus::Incomplete;
    result.corrections = dec.corrections();
    result.layer_cycles = dec.layer_cycles();
    result.matches = dec.matches();
    result.total_cycles = dec.clock();
    return result;
}

}  // namespace qecool
