# Brute-force exact p-values for data/example16.csv with exact rational arithmetic.
# Output recorded in example16_bruteforce.out.
from itertools import combinations
from fractions import Fraction as F
y=[-0.90,0.18,1.59,-1.13,-0.08,0.13,0.71,-0.24,2.98,0.86,1.42,1.98,0.61,-0.04,2.78,-1.31]
w=[0]*8+[1]*8
n=16
def dm(wv,y0,y1):
    t=[y1[i] for i in range(n) if wv[i]]; c=[y0[i] for i in range(n) if not wv[i]]
    return sum(t)/len(t)-sum(c)/len(c)
def imp(tau):
    y0=[y[i]-tau[i] if w[i] else y[i] for i in range(n)]
    y1=[y[i] if w[i] else y[i]+tau[i] for i in range(n)]
    return y0,y1
def p(y0,y1,stat=dm):
    tobs=stat(w,y0,y1); cnt=0; tot=0
    for T in combinations(range(n),8):
        wv=[0]*n
        for i in T: wv[i]=1
        t=stat(wv,y0,y1); tot+=1
        if t>=tobs-1e-12*max(1,abs(tobs)): cnt+=1
    return cnt,tot,cnt/tot
print("tobs",dm(w,y,y))
print("null0",p(*imp([0]*16)))
print("const-1",p(*imp([-1]*16)))
tau=[0]*16; tau[1]=-2; tau[11]=-1
print("nonsup",p(*imp(tau)))
yc=[y[i]-w[i]*tau[i] for i in range(n)]
print("ctrl-baseline",p(yc,yc))
yt=[y[i]+(1-w[i])*tau[i] for i in range(n)]
print("trt-baseline",p(yt,yt))
# midranks
def midranks(v):
    r=[0]*len(v)
    for i in range(len(v)):
        less=sum(1 for x in v if x<v[i]); eq=sum(1 for x in v if x==v[i])
        r[i]=less+(eq+1)/2
    return r
r=midranks(y); print("ranksum",sum(r[i] for i in range(n) if w[i]))
