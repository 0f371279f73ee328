from mpmath import mp, mpf, quad, log, exp, inf, beta, hyp2f1
mp.dps = 30
def g_quad(s, lam):
    # E[s^Y], Y | tau ~ Geom(e^{-lam tau}), tau ~ Exp(1)
    s = mpf(s); lam = mpf(lam)
    f = lambda t: exp(-t) * s*exp(-lam*t)/(1 - s*(1-exp(-lam*t)))
    return quad(f, [0, 1, 10, inf])
def g_l1(s):
    s = mpf(s); return 1 + (1-s)/s*log(1-s)
def mu_quad(m, lam, p): return m*(1 - g_quad(1-mpf(p)/m, lam))
def pmf_dp(m, lam, p, K=4000):
    # Markov chain on distinct-hit count, summed against Yule pmf; P(W=m) by complement
    lam = mpf(lam); p = mpf(p); a = 1 + 1/lam
    pk = 1/(1+lam)
    dist = [mpf(0)]*(m+1); dist[0] = mpf(1)
    out = [mpf(0)]*(m+1)
    for k in range(1, K+1):
        new = [mpf(0)]*(m+1)
        for h in range(m+1):
            if dist[h] == 0: continue
            up = p*(m-h)/m
            new[h] += dist[h]*(1-up)
            if h < m: new[h+1] += dist[h]*up
        dist = new
        for w in range(m): out[w] += pk*dist[w]
        pk = pk*k/(a+k)
    out[m] = 1 - sum(out[:m])
    return out
print("g(0.5;1)", g_l1(0.5), g_quad(0.5, 1))
print("g(0.75;1)", g_l1(0.75))
print("g(0.3;2.5)", g_quad(0.3, 2.5))
print("g(0.9;0.2)", g_quad(0.9, 0.2))
print("g(0.55;100)", g_quad(0.55, 100))
print("mu(2,1,.5)", mu_quad(2,1,0.5), 2*0.5/1.5*log(4))
print("mu(3,2,.7)", mu_quad(3,2,0.7))
print("mu(3,1,.5)", 1.5/2.5*log(6))
print("mu(2,1,1)", 2*log(2))
print("pmf(2,1,.5)", pmf_dp(2,1,0.5))
print("pmf(3,2,.7)", pmf_dp(3,2,0.7, 20000))
print("pmf(4,0.5,.3)", pmf_dp(4,0.5,0.3))
for lam,p,m in [(3,0,4),(1,1,3)]: pass
