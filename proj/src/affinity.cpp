#include "pdc/affinity.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <mutex>
#include <thread>
#include <utility>

#include "pdc/errors.hpp"
#include "pdc/util.hpp"

static_assert(std::endian::native == std::endian::little,
              "matrix files are little-endian; big-endian hosts are unsupported");

namespace pdc {

double log_odds(const TermStats& stats) {
    TermStats s = stats;
    if (s.n <= 0) throw std::domain_error("log_odds: collection size must be positive");
    if (s.n_s < 0 || s.n_s > s.n || s.n_t < 0 || s.n_t > s.n ||
        s.n_st < std::max<std::int64_t>(0, s.n_s + s.n_t - s.n) ||
        s.n_st > std::min(s.n_s, s.n_t))
        throw std::domain_error("log_odds: inconsistent 2x2 counts");
    // The table is transpose-invariant; fix the margin order so swapped
    // inputs sum the four terms identically, bit for bit.
    if (s.n_s > s.n_t) std::swap(s.n_s, s.n_t);

    // Degenerate margins carry no information about the other term.
    if (s.n_s == 0 || s.n_s == s.n || s.n_t == 0 || s.n_t == s.n) return 0.0;

    std::int64_t dev = s.n_st * s.n - s.n_s * s.n_t;
    if (dev == 0) return 0.0;

    double n = static_cast<double>(s.n);
    double cells[4] = {
        static_cast<double>(s.n_st),
        static_cast<double>(s.n_s - s.n_st),
        static_cast<double>(s.n_t - s.n_st),
        static_cast<double>(s.n - s.n_s - s.n_t + s.n_st),
    };
    double ps = static_cast<double>(s.n_s) / n;
    double pt = static_cast<double>(s.n_t) / n;
    double qs = static_cast<double>(s.n - s.n_s) / n;  // 1 - ps without cancellation
    double qt = static_cast<double>(s.n - s.n_t) / n;
    double indep[4] = {ps * pt, ps * qt, qs * pt, qs * qt};

    double kl = 0.0;
    for (int c = 0; c < 4; ++c) {
        if (cells[c] == 0.0) continue;  // 0 * log 0 := 0
        double p = cells[c] / n;
        kl += p * std::log(p / indep[c]);
    }
    double magnitude = n * kl;
    return dev > 0 ? magnitude : -magnitude;
}

struct SigmaMatrix::Storage {
    std::vector<double> owned;
    void* map_base = nullptr;
    std::size_t map_len = 0;
    const double* tri = nullptr;

    Storage() = default;
    Storage(const Storage&) = delete;
    Storage& operator=(const Storage&) = delete;
    ~Storage() {
        if (map_base) ::munmap(map_base, map_len);
    }
};

namespace {

constexpr char kMagic[4] = {'P', 'D', 'C', '1'};
constexpr std::uint32_t kSchema = 1;
constexpr std::size_t kHeaderBytes = 24;

std::int64_t intersect_count(const std::vector<std::uint32_t>& a,
                             const std::vector<std::uint32_t>& b) {
    std::int64_t n = 0;
    auto ia = a.begin(), ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) ++ia;
        else if (*ib < *ia) ++ib;
        else { ++n; ++ia; ++ib; }
    }
    return n;
}

}  // namespace

SigmaMatrix SigmaMatrix::build(const TermSet& terms, const Corpus& corpus,
                               std::size_t max_order, unsigned threads) {
    std::size_t order = terms.size();
    if (order > max_order)
        throw ConfigError("term set of " + std::to_string(order) +
                          " exceeds the matrix order limit of " +
                          std::to_string(max_order));

    std::vector<const std::vector<std::uint32_t>*> postings(order);
    for (std::size_t i = 0; i < order; ++i) {
        postings[i] = corpus.postings(terms.entries[i].term);
        if (!postings[i])
            throw DataError("term \"" + terms.entries[i].term +
                            "\" is not in the corpus term index");
    }

    std::int64_t n = corpus.doc_count();
    std::vector<double> tri(tri_count(order));

    unsigned nthreads = threads ? threads : std::thread::hardware_concurrency();
    if (nthreads == 0) nthreads = 1;
    nthreads = std::min<std::size_t>(nthreads, std::max<std::size_t>(order, 1));

    std::atomic<std::size_t> next_row{1};
    std::exception_ptr first_error;
    std::mutex error_mu;

    auto worker = [&] {
        try {
            while (true) {
                std::size_t i = next_row.fetch_add(1);
                if (i >= order) return;
                std::size_t base = i * (i - 1) / 2;
                for (std::size_t j = 0; j < i; ++j) {
                    TermStats st;
                    st.n = n;
                    st.n_s = static_cast<std::int64_t>(postings[i]->size());
                    st.n_t = static_cast<std::int64_t>(postings[j]->size());
                    st.n_st = intersect_count(*postings[i], *postings[j]);
                    tri[base + j] = log_odds(st);
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lk(error_mu);
            if (!first_error) first_error = std::current_exception();
        }
    };

    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    return from_lower_triangle(order, std::move(tri));
}

SigmaMatrix SigmaMatrix::from_lower_triangle(std::size_t order,
                                             std::vector<double> tri) {
    if (tri.size() != tri_count(order))
        throw std::invalid_argument("lower triangle size does not match the order");
    auto store = std::make_shared<Storage>();
    store->owned = std::move(tri);
    store->tri = store->owned.data();

    SigmaMatrix m;
    m.order_ = order;
    m.tri_ = store->tri;
    m.store_ = std::move(store);
    return m;
}

SigmaMatrix SigmaMatrix::load(const std::filesystem::path& path) {
    int fd = ::open(path.c_str(), O_RDONLY);
    if (fd < 0) throw IoError("cannot open " + path.string());

    struct ::stat st{};
    if (::fstat(fd, &st) != 0) {
        ::close(fd);
        throw IoError("cannot stat " + path.string());
    }
    std::size_t len = static_cast<std::size_t>(st.st_size);
    if (len < kHeaderBytes) {
        ::close(fd);
        throw ParseError("matrix file too short: " + path.string());
    }

    void* base = ::mmap(nullptr, len, PROT_READ, MAP_PRIVATE, fd, 0);
    ::close(fd);
    if (base == MAP_FAILED) throw IoError("cannot map " + path.string());

    auto store = std::make_shared<Storage>();
    store->map_base = base;
    store->map_len = len;

    const unsigned char* bytes = static_cast<const unsigned char*>(base);
    if (std::memcmp(bytes, kMagic, 4) != 0)
        throw ParseError("not a sigma matrix file (bad magic): " + path.string());

    std::uint32_t schema = 0;
    std::memcpy(&schema, bytes + 4, 4);
    if (schema != kSchema)
        throw ParseError("matrix file schema " + std::to_string(schema) +
                         " is incompatible with schema " +
                         std::to_string(kSchema) + ": " + path.string());

    std::uint64_t order = 0;
    std::memcpy(&order, bytes + 8, 8);
    if (len != kHeaderBytes + tri_count(order) * sizeof(double))
        throw ParseError("matrix file size does not match its order: " + path.string());

    store->tri = reinterpret_cast<const double*>(bytes + kHeaderBytes);

    SigmaMatrix m;
    m.order_ = static_cast<std::size_t>(order);
    m.tri_ = store->tri;
    m.store_ = std::move(store);
    return m;
}

void SigmaMatrix::save(const std::filesystem::path& path,
                       std::uint64_t seed) const {
    std::string out;
    std::size_t count = tri_count(order_);
    out.reserve(kHeaderBytes + count * sizeof(double));
    out.append(kMagic, 4);
    std::uint32_t schema = kSchema;
    out.append(reinterpret_cast<const char*>(&schema), 4);
    std::uint64_t order = order_;
    out.append(reinterpret_cast<const char*>(&order), 8);
    out.append(reinterpret_cast<const char*>(&seed), 8);
    if (count)
        out.append(reinterpret_cast<const char*>(tri_), count * sizeof(double));
    write_file(path, out);
}

double SigmaMatrix::sigma0(std::size_t i, std::size_t j) const {
    if (i >= order_ || j >= order_)
        throw std::domain_error("sigma index out of range");
    if (i == j) return 0.0;
    if (i < j) std::swap(i, j);
    return tri_[i * (i - 1) / 2 + j];
}

}  // namespace pdc
