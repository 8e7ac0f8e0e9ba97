/*
 * Cycle-level simulation of the spike-based grid decoding protocol as
 * message-passing state machines: one Unit per ancilla in a d x (d-1) grid,
 * a Row Master per row, two Boundary Units (west/east), and one Controller.
 *
 * Timing quantum: 1 cycle = 1 spike hop = 1 token handoff; control
 * broadcasts (Push/Pop/Restart/RequestSpike/Finish) are free. The Controller
 * raster-scans the grid per hop limit C and base depth b, granting the Token
 * to eligible Units; a Token holder whose Reg bit at the base depth is set
 * becomes the sink of a spike race and matches the first arrival (its own
 * later Reg bit, another Unit's spike, or a Boundary Unit spike).
 */

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qecool/lattice.hpp"
#include "qecool/matcher.hpp"

namespace qecool {

enum class DecodeMode : uint8_t { TwoD, Batch3D, Online3D };

std::string to_string(DecodeMode mode);

enum class Direction : uint8_t { North, East, South, West };

Direction rotate_180(Direction dir);
std::string to_string(Direction dir);

// Routing rule of the SPIKE procedure: a unit in the sink's row forwards
// East if the token already visited it, otherwise West; any other unit
// forwards South if visited, otherwise North. Both cases point at the
// current raster position.
Direction route_spike(int unit_row, int current_row, bool flag_token);

struct DecoderConfig {
    DecodeMode mode = DecodeMode::Batch3D;
    int reg_depth = 7;            // Reg capacity in bits
    int th_v = -1;                // vertical threshold (gate: m - b > th_v)
    int n_depth = 1;              // deepest base depth the Controller scans
    int n_limit = 0;              // hop-limit iterations; 0 -> 2d + reg_depth
    int timeout_base = 2;         // cycles granted per token before timeout...
    int timeout_per_hop = 2;      // ...plus this many per hop-limit step
    int boundary_spike_delay = 1; // extra cycles before a Boundary Unit emits
    double clock_hz = 2e9;
    double meas_interval_s = 1e-6;

    int timeout(int hop_limit) const { return timeout_base + timeout_per_hop * hop_limit; }
    int effective_n_limit(int d) const { return n_limit > 0 ? n_limit : 2 * d + reg_depth; }
    uint64_t cycles_per_round() const;

    void validate(int d) const;  // throws std::invalid_argument
};

// Paper parameterization per mode. `total_layers` is the number of
// measurement rounds the decoder will ingest (noisy + perfect).
DecoderConfig make_decoder_config(DecodeMode mode, int d, int total_layers);

struct UnitState {
    std::vector<uint8_t> reg;  // FIFO of detection bits, index 0 oldest
    bool hold_token = false;
    bool flag_token = false;   // token visited this unit (or its row was
                               // skipped) during the current raster
    std::optional<Direction> dir;  // saved origin side of the relayed spike
    int base = 0;                  // base-depth pointer from the last Restart

    // First set bit at depth >= from, below occupancy; -1 if none.
    int first_set(int from, int occupancy) const;
};

struct ControllerState {
    int hop_limit = 1;    // C in [1, n_limit]
    int base = 0;         // b
    int current_row = 0;
    bool shift = true;    // AND of !Reg[0] over visited units this raster
};

struct MatchRecord {
    enum class Kind : uint8_t { Pair, Boundary, Vertical };
    Kind kind{Kind::Pair};
    Event a;  // sink event (absolute round index)
    Event b;  // partner event; unused for Boundary
    BoundarySide side{BoundarySide::West};
    int32_t weight = 0;

    int dt() const { return kind == Kind::Boundary ? 0 : std::abs(int(a.t) - int(b.t)); }
};

enum class DecodeStatus : uint8_t { Ok, Overflow, Incomplete };

struct CycleStats {
    uint64_t layers = 0;
    uint64_t total = 0;
    uint64_t total_sq = 0;
    uint64_t max = 0;

    void add(uint64_t cycles);
    void merge(const CycleStats& other);
    double mean() const;
    double stddev() const;
};

struct DecodeResult {
    DecodeStatus status = DecodeStatus::Ok;
    CorrectionSet corrections;
    std::vector<uint32_t> layer_cycles;  // work cycles attributed to each pop
    std::vector<MatchRecord> matches;
    uint64_t total_cycles = 0;

    int64_t matching_weight() const;
    CycleStats cycle_stats() const;
};

struct TraceEvent {
    uint64_t cycle = 0;
    std::string kind;
    std::string src;
    std::string dst;
};

using TraceSink = std::function<void(const TraceEvent&)>;

std::string to_string(const TraceEvent& ev);

// One token window: the race of spikes toward a sink, resolved exactly by
// per-cycle propagation. Exposed separately so the race rules (routing,
// relay dedup, N>E>S>W priority, boundary delay) are directly testable.
struct SpikeWindow {
    struct UnitIn {
        int first_set = -1;  // first set Reg depth >= base; -1 = never spikes
        bool flag_token = false;
    };

    int rows = 0;
    int cols = 0;
    int sink_r = 0;
    int sink_c = 0;
    int base = 0;
    int current_row = 0;
    int timeout = 0;
    int boundary_delay = 1;
    int self_first_set = -1;  // sink's own next set depth (> base); -1 none
    std::vector<UnitIn> units;  // rows*cols, row-major; sink entry ignored

    struct Outcome {
        enum class Kind : uint8_t { None, SelfVertical, Partner, Boundary };
        Kind kind{Kind::None};
        int arrival = -1;        // cycles after the spike request
        int stop_r = -1;         // unit whose bit the Correct signal consumes
        int stop_c = -1;
        int stop_depth = -1;
        BoundarySide side{BoundarySide::West};
        // Walk of the syndrome retrace, sink first; for Boundary it ends at
        // the edge unit and the correction additionally exits the grid.
        std::vector<std::pair<int, int>> path;
        int retrace_hops = 0;    // data qubits flipped
    };

    Outcome run(TraceSink* trace = nullptr, uint64_t cycle_base = 0) const;
};

class Decoder {
public:
    Decoder(int d, DecoderConfig cfg, TraceSink trace = nullptr);

    // Broadcast Push: every unit appends its detection bit. Raises the
    // overflow flag instead when the Reg is already full.
    void push_measurement(std::span<const uint8_t> event_bits);

    struct PassOutcome {
        uint64_t cycles = 0;
        bool all_clear = false;  // every Reg empty
        bool progressed = false; // popped a layer or matched something
    };

    // Runs (or resumes) one Controller invocation, stopping early once the
    // global clock reaches `cycle_deadline`. A window in progress completes
    // atomically, so the pause can overshoot by up to timeout(C) + retrace.
    PassOutcome run_decode_pass(uint64_t cycle_deadline = ~0ull);

    // Trial closure: disables the th_v gate so remaining layers can retire.
    void begin_drain() { th_v_ = -1; }

    bool pass_active() const { return pass_active_; }

    void advance_clock_to(uint64_t cycle);

    int d() const { return d_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int occupancy() const { return m_; }
    int pops() const { return pops_; }
    bool overflowed() const { return overflowed_; }
    bool all_clear() const { return total_bits_ == 0 && m_ == 0; }
    uint64_t clock() const { return cycle_; }
    const DecoderConfig& config() const { return cfg_; }
    const UnitState& unit(int r, int c) const { return units_[size_t(r * cols_ + c)]; }
    const ControllerState& controller() const { return ctl_; }
    const CorrectionSet& corrections() const { return corrections_; }
    const std::vector<MatchRecord>& matches() const { return matches_; }
    const std::vector<uint32_t>& layer_cycles() const { return layer_cycles_; }

    // Test hook: places the raster at (r, c) with the rows above marked
    // visited, then runs one spike window against the current Reg contents.
    SpikeWindow::Outcome probe_window(int r, int c, int base, int timeout);

private:
    struct RasterPos {
        int row = 0;
        int col = -1;  // -1: row not entered (Row Master decision pending)
    };

    UnitState& unit_mut(int r, int c) { return units_[size_t(r * cols_ + c)]; }

    bool gate_open(int base) const { return m_ - base > th_v_; }
    int max_base() const;
    void trace(uint64_t cycle, const char* kind, std::string src, std::string dst);
    void clear_flags();
    void mark_row_flags(int row);
    void pop_layer();
    void clear_bit(int r, int c, int depth);
    void flip_between(int r1, int c1, int r2, int c2);
    void flip_boundary_exit(int r, BoundarySide side);
    SpikeWindow build_window(int r, int c, int base, int timeout) const;
    // Returns cycles consumed by the token step at the raster position.
    uint64_t token_step(int r, int c);

    int d_;
    int rows_;
    int cols_;
    DecoderConfig cfg_;
    int th_v_;
    int n_limit_;
    TraceSink trace_;

    std::vector<UnitState> units_;
    std::vector<int> row_bits_;       // set bits per row
    std::vector<int> row_reg0_;       // units per row with Reg[0] set
    int64_t total_bits_ = 0;
    int m_ = 0;      // occupancy, uniform across units (broadcast push/pop)
    int pops_ = 0;   // layers retired; absolute round = pops_ + depth
    bool overflowed_ = false;

    // Resumable controller position.
    bool pass_active_ = false;
    ControllerState ctl_;
    RasterPos pos_;
    bool raster_any_token_ = false;
    uint64_t raster_cycles_ = 0;
    uint64_t sweep_pending_ = 0;  // stalled-raster cycles awaiting a working raster
    int tokens_this_sweep_ = 0;
    int pops_this_sweep_ = 0;
    bool pass_progressed_ = false;

    uint64_t cycle_ = 0;
    uint64_t attributed_cycles_ = 0;  // work cycles since the last pop

    // Units whose Dir register is live for the most recent match; the next
    // Restart broadcast drops them.
    std::vector<std::pair<int, int>> last_dir_path_;

    CorrectionSet corrections_;
    std::vector<MatchRecord> matches_;
    std::vector<uint32_t> layer_cycles_;
};

// Feeds every syndrome layer to a fresh decoder and runs it to completion.
// Batch/2-D: push everything, then decode to exhaustion. Online: one push per
// measurement interval (clock_hz * meas_interval_s cycles of budget each,
// unspent work carrying over), then a final drain. Reg overflow fails the
// trial immediately.
DecodeResult decode_trial(const SyndromeHistory& syndromes, int d, const DecoderConfig& cfg,
                          TraceSink trace = nullptr);

}  // namespace qecool
