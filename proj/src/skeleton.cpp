#include "hpt/skeleton.hpp"

#include <zlib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hpt {

// ---------------- coefficient blocks ----------------

size_t CoefficientBlock::column_count(const GeometryKind& kind, int degree) {
    return kind.family == GeometryKind::Family::Triangle ? static_cast<size_t>(degree) + 1
                                                         : 2 * static_cast<size_t>(degree) + 1;
}

CoefficientBlock CoefficientBlock::zeros(const GeometryKind& kind, int degree) {
    if (degree < 0) throw domain_error("CoefficientBlock: degree >= 0 required");
    CoefficientBlock b;
    b.kind = kind;
    b.degree = degree;
    b.values = DenseMatrix(static_cast<size_t>(degree) + 1, column_count(kind, degree));
    return b;
}

size_t CoefficientBlock::num_columns() const { return values.cols(); }

int CoefficientBlock::column_order(const GeometryKind& kind, size_t col) {
    if (kind.family == GeometryKind::Family::Triangle) return static_cast<int>(col);
    if (col == 0) return 0;
    int k = static_cast<int>((col + 1) / 2);
    return (col % 2) ? k : -k;
}

// ---------------- plan structure ----------------

size_t TransformPlan::num_blocks() const {
    return static_cast<size_t>((degree + block - 1) / block);
}

int TransformPlan::parity_families() const {
    return kind.family == GeometryKind::Family::Triangle ? 1 : 2;
}

size_t TransformPlan::block_of_layer(int m) const {
    size_t q = static_cast<size_t>(m / block);
    size_t nb = num_blocks();
    if (q >= nb) q = nb - 1;  // the last block absorbs the top layer(s)
    return q;
}

int TransformPlan::base_layer(int m) const {
    int q = static_cast<int>(block_of_layer(m));
    int off = parity_families() == 2 ? (m - q * block) % 2 : 0;
    return q * block + off;
}

const PlanNode& TransformPlan::node_for(int source_base) const {
    for (const auto& node : nodes)
        if (node.source_base == source_base) return node;
    throw domain_error("TransformPlan: no node with source base " + std::to_string(source_base));
}

static size_t lowbit(size_t q) { return q & (~q + 1); }

TransformPlan build_plan(const GeometryKind& kind, int degree, int block) {
    if (degree < 1) throw domain_error("build_plan: degree >= 1 required");
    const int stride = layer_stride(kind);
    if (block == 0) {
        block = static_cast<int>(std::lround(std::sqrt(static_cast<double>(degree))));
        if (stride == 2 && block % 2) ++block;
        block = std::max(block, 2);
        block = std::min(block, degree);
    }
    if (block < 1 || block > degree) throw domain_error("build_plan: block size out of [1, degree]");
    if (stride == 2 && block % 2 != 0 && block != degree)
        throw domain_error("build_plan: sphere/disk blocks must be even to align parity families");

    TransformPlan plan;
    plan.kind = kind;
    plan.degree = degree;
    plan.block = block;

    const size_t nblocks = plan.num_blocks();
    size_t K = 0;
    while ((size_t{1} << K) < nblocks) ++K;
    for (size_t q = 1; q < nblocks; ++q) {
        size_t span = lowbit(q);
        int level = static_cast<int>(K) - static_cast<int>(std::log2(static_cast<double>(span)) + 0.5);
        size_t qt = q - span;
        for (int off = 0; off < plan.parity_families(); ++off) {
            PlanNode node;
            node.level = level;
            node.source_base = static_cast<int>(q) * block + off;
            node.target_base = static_cast<int>(qt) * block + off;
            plan.nodes.push_back(std::move(node));
        }
    }
    return plan;
}

void precompute(TransformPlan& plan, unsigned threads) {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    parallel_for(
        plan.nodes.size(),
        [&](size_t i) {
            PlanNode& node = plan.nodes[i];
            if (node.computed) return;  // idempotent
            auto n0 = clock::now();
            try {
                node.dec = layer_decomposition(plan.kind, node.target_base, node.source_base,
                                               plan.degree);
            } catch (const numerical_error& e) {
                throw numerical_error(
                    "precompute: node validation failed (target=" +
                    std::to_string(node.target_base) + " source=" +
                    std::to_string(node.source_base) + " N=" +
                    std::to_string(layer_degree_count(plan.kind, node.target_base, plan.degree)) +
                    "): " + e.what());
            }
            node.seconds = std::chrono::duration<double>(clock::now() - n0).count();
            node.computed = true;
        },
        threads);
    plan.precomputed = true;
    plan.ledger.precompute_seconds += std::chrono::duration<double>(clock::now() - t0).count();
    plan.ledger.storage_bytes = 0;
    for (const auto& node : plan.nodes)
        plan.ledger.storage_bytes +=
            8 * (node.dec.eigenvalues.size() + node.dec.U.rows() * node.dec.U.cols());
}

// ---------------- execution ----------------

// degrees of layer m occupy rows m, m+step, ... with step 2 on the disk and 1 otherwise
static int row_step(const GeometryKind& kind) {
    return kind.family == GeometryKind::Family::Disk ? 2 : 1;
}

static std::vector<double> extract_layer(const CoefficientBlock& c, int m, size_t col) {
    const int step = row_step(c.kind);
    size_t len = layer_degree_count(c.kind, m, c.degree);
    std::vector<double> v(len);
    for (size_t i = 0; i < len; ++i) v[i] = c.values(static_cast<size_t>(m) + step * i, col);
    return v;
}

static void deposit_layer(CoefficientBlock& c, int m, size_t col, const std::vector<double>& v) {
    const int step = row_step(c.kind);
    for (size_t i = 0; i < v.size(); ++i) c.values(static_cast<size_t>(m) + step * i, col) = v[i];
}

// block path q -> q - lowbit(q) -> ... -> 0
static std::vector<size_t> block_path(size_t q) {
    std::vector<size_t> path;
    while (q > 0) {
        path.push_back(q);
        q -= lowbit(q);
    }
    return path;
}

CoefficientBlock execute(const TransformPlan& plan, const CoefficientBlock& coeffs,
                         Direction direction, unsigned threads) {
    if (coeffs.degree != plan.degree) throw domain_error("execute: degree mismatch");
    if (coeffs.kind.family != plan.kind.family) throw domain_error("execute: geometry mismatch");
    if (!plan.precomputed && plan.num_blocks() > 1)
        throw domain_error("execute: plan has not been precomputed");

    const int stride = layer_stride(plan.kind);
    CoefficientBlock out = CoefficientBlock::zeros(plan.kind, plan.degree);

    parallel_for(
        coeffs.num_columns(),
        [&](size_t col) {
            int m = std::abs(CoefficientBlock::column_order(plan.kind, col));
            const int base = plan.base_layer(m);
            const size_t q = plan.block_of_layer(m);
            const int family_off = base - static_cast<int>(q) * plan.block;

            if (direction == Direction::ToBase) {
                std::vector<double> v = extract_layer(coeffs, m, col);
                for (int src = m; src > base; src -= stride) {
                    GivensSequence seq = layer_step_sequence(plan.kind, src - stride, v.size());
                    if (plan.cache_givens) seq.enable_cache();
                    v = seq.apply(v);
                }
                for (size_t qq : block_path(q)) {
                    const PlanNode& node =
                        plan.node_for(static_cast<int>(qq) * plan.block + family_off);
                    v = node.dec.apply(v);
                }
                deposit_layer(out, family_off, col, v);
            } else {
                std::vector<double> v = extract_layer(coeffs, family_off, col);
                auto path = block_path(q);
                for (auto it = path.rbegin(); it != path.rend(); ++it) {
                    const PlanNode& node =
                        plan.node_for(static_cast<int>(*it) * plan.block + family_off);
                    v = node.dec.apply_transposed(v);
                }
                for (int tgt = base + stride; tgt <= m; tgt += stride) {
                    GivensSequence seq =
                        layer_step_sequence(plan.kind, tgt - stride,
                                            layer_degree_count(plan.kind, tgt, plan.degree));
                    if (plan.cache_givens) seq.enable_cache();
                    v = seq.apply_inverse(v);
                }
                deposit_layer(out, m, col, v);
            }
        },
        threads);
    return out;
}

// ---------------- cost accounting ----------------

CostReport cost_report(const TransformPlan& plan) {
    CostReport r;
    r.decomposition_count = plan.nodes.size();
    r.decompositions_per_parity = plan.nodes.size() / static_cast<size_t>(plan.parity_families());
    const size_t nblocks = plan.num_blocks();
    size_t K = 0;
    while ((size_t{1} << K) < nblocks) ++K;
    r.path_bound = K;
    for (size_t q = 0; q < nblocks; ++q) {
        size_t hops = 0, qq = q;
        while (qq) { ++hops; qq -= lowbit(qq); }
        r.max_path_length = std::max(r.max_path_length, hops);
    }
    r.storage_bytes = plan.ledger.storage_bytes;
    r.precompute_seconds = plan.ledger.precompute_seconds;

    const int stride = layer_stride(plan.kind);
    auto chain_rotations = [&](int from, int to_exclusive) {
        // one stride-step from layer `src` applies (number of source degrees) rotations
        unsigned long long c = 0;
        for (int src = from; src > to_exclusive; src -= stride)
            c += static_cast<unsigned long long>(layer_degree_count(plan.kind, src, plan.degree));
        return c;
    };
    auto column_multiplicity = [&](int m) -> unsigned long long {
        if (plan.kind.family == GeometryKind::Family::Triangle) return 1;
        return m == 0 ? 1 : 2;
    };
    for (int m = 0; m <= plan.degree; ++m) {
        r.givens_rotations += column_multiplicity(m) * chain_rotations(m, plan.base_layer(m));
        int parity_base = stride == 2 ? m % 2 : 0;
        r.all_givens_rotations += column_multiplicity(m) * chain_rotations(m, parity_base);
    }

    // measured per-node Pi (recorded at precompute) and Phi (probe application)
    for (const auto& node : plan.nodes) {
        NodeCost nc;
        nc.level = node.level;
        nc.source_base = node.source_base;
        nc.target_base = node.target_base;
        nc.rows = node.dec.rows;
        nc.cols = node.dec.cols;
        nc.precompute_seconds = node.seconds;
        if (node.computed && node.dec.cols > 0) {
            std::vector<double> probe(node.dec.cols, 1.0);
            auto t0 = std::chrono::steady_clock::now();
            auto y = node.dec.apply(probe);
            nc.apply_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                   .count();
            (void)y;
        }
        r.nodes.push_back(nc);
    }
    return r;
}

std::string CostReport::table() const {
    std::ostringstream os;
    auto row = [&](const char* k, const std::string& v) {
        os << "  " << k;
        for (size_t i = std::strlen(k); i < 28; ++i) os << ' ';
        os << v << '\n';
    };
    row("decompositions", std::to_string(decomposition_count));
    row("decompositions per parity", std::to_string(decompositions_per_parity));
    row("max path length", std::to_string(max_path_length));
    row("path bound", std::to_string(path_bound));
    row("givens rotations", std::to_string(givens_rotations));
    row("all-givens rotations", std::to_string(all_givens_rotations));
    row("storage bytes", std::to_string(storage_bytes));
    row("precompute seconds", std::to_string(precompute_seconds));
    if (!nodes.empty()) {
        os << "  per-node timings (level, source->target, rows x cols, Pi s, Phi s):\n";
        char line[160];
        for (const auto& n : nodes) {
            std::snprintf(line, sizeof line, "    L%-2d %4d->%-4d %4zux%-4zu  %.6f  %.6f\n",
                          n.level, n.source_base, n.target_base, n.rows, n.cols,
                          n.precompute_seconds, n.apply_seconds);
            os << line;
        }
    }
    return os.str();
}

// ---------------- serialization ----------------

namespace {

class CrcWriter {
public:
    explicit CrcWriter(std::ostream& os) : os_(os) {}
    void raw(const void* p, size_t n) {
        os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        crc_file_ = crc32(crc_file_, static_cast<const Bytef*>(p), static_cast<uInt>(n));
        crc_node_ = crc32(crc_node_, static_cast<const Bytef*>(p), static_cast<uInt>(n));
    }
    template <class T> void put(T v) { raw(&v, sizeof v); }
    void begin_node() { crc_node_ = crc32(0L, Z_NULL, 0); }
    uint32_t node_crc() const { return static_cast<uint32_t>(crc_node_); }
    uint32_t file_crc() const { return static_cast<uint32_t>(crc_file_); }

private:
    std::ostream& os_;
    uLong crc_file_ = crc32(0L, Z_NULL, 0);
    uLong crc_node_ = crc32(0L, Z_NULL, 0);
};

class CrcReader {
public:
    explicit CrcReader(std::istream& is) : is_(is) {}
    void raw(void* p, size_t n) {
        is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<size_t>(is_.gcount()) != n)
            throw numerical_error("plan stream truncated");
        crc_file_ = crc32(crc_file_, static_cast<const Bytef*>(p), static_cast<uInt>(n));
        crc_node_ = crc32(crc_node_, static_cast<const Bytef*>(p), static_cast<uInt>(n));
    }
    template <class T> T get() {
        T v;
        raw(&v, sizeof v);
        return v;
    }
    void begin_node() { crc_node_ = crc32(0L, Z_NULL, 0); }
    uint32_t node_crc() const { return static_cast<uint32_t>(crc_node_); }
    uint32_t file_crc() const { return static_cast<uint32_t>(crc_file_); }

private:
    std::istream& is_;
    uLong crc_file_ = crc32(0L, Z_NULL, 0);
    uLong crc_node_ = crc32(0L, Z_NULL, 0);
};

constexpr char plan_magic[8] = {'H', 'P', 'T', 'P', 'L', 'A', 'N', '1'};
constexpr char coeff_magic[4] = {'H', 'P', 'C', '1'};

} // namespace

void serialize(const TransformPlan& plan, std::ostream& sink) {
    if (!plan.precomputed && plan.num_blocks() > 1)
        throw domain_error("serialize: plan has not been precomputed");
    CrcWriter w(sink);
    w.raw(plan_magic, sizeof plan_magic);
    w.put<uint32_t>(1);
    w.put<uint8_t>(static_cast<uint8_t>(plan.kind.family));
    const uint8_t reserved[3] = {0, 0, 0};
    w.raw(reserved, 3);
    w.put<uint64_t>(static_cast<uint64_t>(plan.degree));
    w.put<uint64_t>(static_cast<uint64_t>(plan.block));
    w.put<double>(plan.kind.alpha);
    w.put<double>(plan.kind.beta);
    w.put<double>(plan.kind.gamma);
    w.put<uint64_t>(plan.nodes.size());
    for (const auto& node : plan.nodes) {
        w.begin_node();
        w.put<uint32_t>(static_cast<uint32_t>(node.level));
        w.put<uint32_t>(static_cast<uint32_t>(node.source_base));
        w.put<uint32_t>(static_cast<uint32_t>(node.target_base));
        w.put<uint64_t>(node.dec.rows);
        w.put<uint64_t>(node.dec.buffer);
        w.put<uint64_t>(node.dec.cols);
        for (double v : node.dec.eigenvalues) w.put<double>(v);
        w.raw(node.dec.U.data(), 8 * node.dec.U.rows() * node.dec.U.cols());
        w.put<uint32_t>(w.node_crc());
    }
    uint32_t fc = w.file_crc();
    sink.write(reinterpret_cast<const char*>(&fc), 4);
}

TransformPlan deserialize(std::istream& source) {
    CrcReader r(source);
    char magic[8];
    r.raw(magic, 8);
    if (std::memcmp(magic, plan_magic, 8) != 0) throw numerical_error("plan magic mismatch");
    if (r.get<uint32_t>() != 1) throw numerical_error("plan version mismatch");
    uint8_t fam = r.get<uint8_t>();
    if (fam > 2) throw numerical_error("plan geometry kind invalid");
    uint8_t reserved[3];
    r.raw(reserved, 3);
    uint64_t degree = r.get<uint64_t>();
    uint64_t block = r.get<uint64_t>();
    double alpha = r.get<double>(), beta = r.get<double>(), gamma = r.get<double>();

    GeometryKind kind = fam == 0 ? GeometryKind::sphere()
                        : fam == 1 ? GeometryKind::disk()
                                   : GeometryKind::triangle(alpha, beta, gamma);
    TransformPlan plan = build_plan(kind, static_cast<int>(degree), static_cast<int>(block));
    uint64_t count = r.get<uint64_t>();
    if (count != plan.nodes.size()) throw numerical_error("plan node count mismatch");
    for (auto& node : plan.nodes) {
        r.begin_node();
        int level = static_cast<int>(r.get<uint32_t>());
        int sb = static_cast<int>(r.get<uint32_t>());
        int tb = static_cast<int>(r.get<uint32_t>());
        uint64_t rows = r.get<uint64_t>();
        uint64_t buffer = r.get<uint64_t>();
        uint64_t cols = r.get<uint64_t>();
        if (level != node.level || sb != node.source_base || tb != node.target_base)
            throw numerical_error("plan node header inconsistent with structure");
        if (rows != layer_degree_count(kind, tb, static_cast<int>(degree)) ||
            cols != layer_degree_count(kind, sb, static_cast<int>(degree)))
            throw numerical_error("plan node sizes inconsistent with payload");
        node.dec.kind = kind;
        node.dec.target_layer = tb;
        node.dec.source_layer = sb;
        node.dec.rows = rows;
        node.dec.cols = cols;
        node.dec.buffer = buffer;
        node.dec.eigenvalues.resize(cols);
        for (auto& v : node.dec.eigenvalues) v = r.get<double>();
        node.dec.U = DenseMatrix(rows, cols);
        r.raw(node.dec.U.data(), 8 * rows * cols);
        uint32_t want = r.node_crc();
        uint32_t got = r.get<uint32_t>();
        if (got != want) throw numerical_error("plan node checksum failure");
        node.computed = true;
    }
    uint32_t want_file = r.file_crc();
    uint32_t got_file;
    source.read(reinterpret_cast<char*>(&got_file), 4);
    if (source.gcount() != 4) throw numerical_error("plan stream truncated");
    if (got_file != want_file) throw numerical_error("plan file checksum failure");
    plan.precomputed = true;
    plan.ledger.storage_bytes = 0;
    for (const auto& node : plan.nodes)
        plan.ledger.storage_bytes +=
            8 * (node.dec.eigenvalues.size() + node.dec.U.rows() * node.dec.U.cols());
    return plan;
}

void save_plan(const TransformPlan& plan, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw domain_error("cannot open plan file for writing: " + path);
    serialize(plan, os);
    if (!os) throw numerical_error("plan write failed: " + path);
}

TransformPlan load_plan(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw domain_error("cannot open plan file: " + path);
    return deserialize(is);
}

void write_coefficients(const CoefficientBlock& block, std::ostream& sink) {
    sink.write(coeff_magic, 4);
    uint32_t version = 1;
    sink.write(reinterpret_cast<const char*>(&version), 4);
    uint8_t fam = static_cast<uint8_t>(block.kind.family);
    sink.write(reinterpret_cast<const char*>(&fam), 1);
    uint64_t degree = static_cast<uint64_t>(block.degree);
    sink.write(reinterpret_cast<const char*>(&degree), 8);
    sink.write(reinterpret_cast<const char*>(block.values.data()),
               static_cast<std::streamsize>(8 * block.values.rows() * block.values.cols()));
}

CoefficientBlock read_coefficients(std::istream& source) {
    char magic[4];
    source.read(magic, 4);
    if (source.gcount() != 4 || std::memcmp(magic, coeff_magic, 4) != 0)
        throw numerical_error("coefficient magic mismatch");
    uint32_t version;
    source.read(reinterpret_cast<char*>(&version), 4);
    if (source.gcount() != 4 || version != 1) throw numerical_error("coefficient version mismatch");
    uint8_t fam;
    source.read(reinterpret_cast<char*>(&fam), 1);
    uint64_t degree;
    source.read(reinterpret_cast<char*>(&degree), 8);
    if (!source || fam > 2) throw numerical_error("coefficient header invalid");
    GeometryKind kind = fam == 0 ? GeometryKind::sphere()
                        : fam == 1 ? GeometryKind::disk()
                                   : GeometryKind::triangle(0, 0, 0);
    CoefficientBlock block = CoefficientBlock::zeros(kind, static_cast<int>(degree));
    auto bytes = static_cast<std::streamsize>(8 * block.values.rows() * block.values.cols());
    source.read(reinterpret_cast<char*>(block.values.data()), bytes);
    if (source.gcount() != bytes) throw numerical_error("coefficient stream truncated");
    return block;
}

void save_coefficients(const CoefficientBlock& block, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw domain_error("cannot open coefficient file for writing: " + path);
    write_coefficients(block, os);
}

CoefficientBlock load_coefficients(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw domain_error("cannot open coefficient file: " + path);
    return read_coefficients(is);
}

} // namespace hpt
